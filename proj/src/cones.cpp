#include "curvcone/cones.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>

namespace curvcone {

IsoMode IsoMode::fixed(double lambda, double mu) {
    if (lambda < 0.0 || lambda > 1.0 || mu < 0.0 || mu > 1.0)
        throw std::invalid_argument("IsoMode::fixed: lambda, mu must lie in [0,1]");
    return {Tag::Fixed, lambda, mu};
}

IsoMode IsoMode::from_name(const std::string& name) {
    if (name == "pic") return pic();
    if (name == "pic1") return pic1();
    if (name == "pic2") return pic2();
    throw std::invalid_argument("IsoMode: unknown mode " + name);
}

const char* IsoMode::name() const {
    switch (tag) {
        case Tag::Pic: return "pic";
        case Tag::Pic1: return "pic1";
        case Tag::Pic2: return "pic2";
        default: return "fixed";
    }
}

namespace {

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

inline double biquad(double A, double B, double C, double D, double E,
                     double l, double m) {
    return A + l * l * B + m * m * C + l * l * m * m * D - 2.0 * l * m * E;
}

// Quadratic q(l) = P + l^2 Q - 2 l E on [0,1].
FrameEval quad_min(double P, double Q, double E) {
    double best_l = 0.0;
    double best = P;
    const double v1 = P + Q - 2.0 * E;
    if (v1 < best) { best = v1; best_l = 1.0; }
    if (Q > 0.0) {
        const double lc = clamp01(E / Q);
        const double vc = P + lc * lc * Q - 2.0 * lc * E;
        if (vc < best) { best = vc; best_l = lc; }
    }
    return {best, best_l, 1.0};
}

FrameEval box_min(double A, double B, double C, double D, double E) {
    double best = std::numeric_limits<double>::infinity();
    double bl = 0.0, bm = 0.0;
    const auto consider = [&](double l, double m) {
        const double v = biquad(A, B, C, D, E, l, m);
        if (v < best) { best = v; bl = l; bm = m; }
    };
    consider(0.0, 0.0);
    consider(0.0, 1.0);
    consider(1.0, 0.0);
    consider(1.0, 1.0);
    if (C + D > 0.0) consider(1.0, clamp01(E / (C + D)));
    if (B + D > 0.0) consider(clamp01(E / (B + D)), 1.0);
    if (B > 0.0 && C > 0.0 && std::abs(D) > 1e-300) {
        const double r = std::sqrt(B / C);
        const double l2 = (r * E - B) / (r * r * D);
        if (l2 > 0.0 && l2 < 1.0) {
            const double m2 = l2 * B / C;
            if (m2 > 0.0 && m2 < 1.0) consider(std::sqrt(l2), std::sqrt(m2));
        }
    }
    // Coarse grid plus alternating exact 1-d minimizations.
    double gl = 0.0, gm = 0.0, gv = std::numeric_limits<double>::infinity();
    constexpr int kGrid = 17;
    for (int i = 0; i < kGrid; ++i)
        for (int j = 0; j < kGrid; ++j) {
            const double l = static_cast<double>(i) / (kGrid - 1);
            const double m = static_cast<double>(j) / (kGrid - 1);
            const double v = biquad(A, B, C, D, E, l, m);
            if (v < gv) { gv = v; gl = l; gm = m; }
        }
    for (int it = 0; it < 40; ++it) {
        const double ql = B + gm * gm * D;
        const double nl = (ql > 0.0)
            ? clamp01(gm * E / ql)
            : ((biquad(A, B, C, D, E, 0.0, gm) < biquad(A, B, C, D, E, 1.0, gm)) ? 0.0 : 1.0);
        const double qm = C + nl * nl * D;
        const double nm = (qm > 0.0)
            ? clamp01(nl * E / qm)
            : ((biquad(A, B, C, D, E, nl, 0.0) < biquad(A, B, C, D, E, nl, 1.0)) ? 0.0 : 1.0);
        if (nl == gl && nm == gm) break;
        gl = nl;
        gm = nm;
    }
    consider(gl, gm);
    return {best, bl, bm};
}

} // namespace

FrameEval minimize_lambda_mu(double A, double B, double C, double D, double E,
                             const IsoMode& mode, double box_term) {
    // (1-l^2)(1-m^2) K folds into the biquadratic coefficients.
    const double K = box_term;
    const double A2 = A + K, B2 = B - K, C2 = C - K, D2 = D + K;
    switch (mode.tag) {
        case IsoMode::Tag::Fixed: {
            const double v = biquad(A2, B2, C2, D2, E, mode.lambda, mode.mu);
            return {v, mode.lambda, mode.mu};
        }
        case IsoMode::Tag::Pic:
            return {biquad(A2, B2, C2, D2, E, 1.0, 1.0), 1.0, 1.0};
        case IsoMode::Tag::Pic1:
            return quad_min(A2 + C2, B2 + D2, E);
        case IsoMode::Tag::Pic2:
            return box_min(A2, B2, C2, D2, E);
    }
    return {};
}

// ---------------------------------------------------------------------------
// Frame components.

namespace {

struct IsoParts {
    double A, B, C, D, E;
    Eigen::VectorXd om13, om14, om23, om24;
    Eigen::VectorXd w13, w14, w23, w24;
};

void wedge_into(const Eigen::MatrixXd& f, int a, int b, int n, Eigen::VectorXd& out) {
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p)
            out(p) = f(a, i) * f(b, j) - f(a, j) * f(b, i);
}

// Starting frames from the most negative eigen-2-forms of the entries
// matrix: each eigenvector unflattens to an antisymmetric matrix whose top
// rotation planes localize the worst curvature directions.
std::vector<Eigen::MatrixXd> eigen_seed_frames(const Eigen::MatrixXd& entries, int n,
                                               int count) {
    std::vector<Eigen::MatrixXd> out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries);
    if (es.info() != Eigen::Success) return out;
    for (int e = 0; e < count && e < entries.rows(); ++e) {
        const Eigen::VectorXd v = es.eigenvectors().col(e); // ascending order
        Eigen::MatrixXd om = Eigen::MatrixXd::Zero(n, n);
        int p = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++p) {
                om(i, j) = v(p);
                om(j, i) = -v(p);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> planes(om * om.transpose());
        if (planes.info() != Eigen::Success) continue;
        // Top rotation plane (u, om u) and the next one.
        const Eigen::VectorXd u1 = planes.eigenvectors().col(n - 1);
        Eigen::VectorXd w1 = om * u1;
        const Eigen::VectorXd u2 = planes.eigenvectors().col(n - 3);
        Eigen::VectorXd w2 = om * u2;
        if (w1.norm() < 1e-12) w1 = Eigen::VectorXd::Unit(n, 0);
        if (w2.norm() < 1e-12) w2 = Eigen::VectorXd::Unit(n, 1);
        Eigen::MatrixXd frame(4, n);
        frame.row(0) = u1;
        frame.row(1) = u2;
        frame.row(2) = w1.normalized();
        frame.row(3) = w2.normalized();
        out.push_back(orthonormalize_rows(std::move(frame)));
    }
    return out;
}

IsoParts iso_parts(const Eigen::MatrixXd& entries, const Eigen::MatrixXd& frame) {
    const int n = static_cast<int>(frame.cols());
    const int N = static_cast<int>(entries.rows());
    IsoParts p;
    p.om13.resize(N); p.om14.resize(N); p.om23.resize(N); p.om24.resize(N);
    wedge_into(frame, 0, 2, n, p.om13);
    wedge_into(frame, 0, 3, n, p.om14);
    wedge_into(frame, 1, 2, n, p.om23);
    wedge_into(frame, 1, 3, n, p.om24);
    p.w13.noalias() = entries * p.om13;
    p.w14.noalias() = entries * p.om14;
    p.w23.noalias() = entries * p.om23;
    p.w24.noalias() = entries * p.om24;
    p.A = p.om13.dot(p.w13);
    p.B = p.om14.dot(p.w14);
    p.C = p.om23.dot(p.w23);
    p.D = p.om24.dot(p.w24);
    // Universal cross term: R_1324 - R_1423 (= R_1234 when Bianchi holds).
    p.E = p.om13.dot(p.w24) - p.om14.dot(p.w23);
    return p;
}

class IsoObjective final : public FrameObjective {
public:
    IsoObjective(const CurvatureTensor& r, IsoMode mode, double box_term = 0.0)
        : r_(r), mode_(mode), box_term_(box_term), scale_(std::max(1e-12, r.frobenius())) {}

    int n() const override { return r_.n(); }
    int frame_size() const override { return 4; }
    double scale() const override { return scale_; }

    FrameEval evaluate(const Eigen::MatrixXd& frame) const override {
        const IsoParts p = iso_parts(r_.entries(), frame);
        return minimize_lambda_mu(p.A, p.B, p.C, p.D, p.E, mode_, box_term_);
    }

    std::vector<Eigen::MatrixXd> suggested_frames() const override {
        return eigen_seed_frames(r_.entries(), r_.n(), 3);
    }

private:
    const CurvatureTensor& r_;
    IsoMode mode_;
    double box_term_;
    double scale_;
};

class ZObjective final : public FrameObjective {
public:
    ZObjective(const CurvatureTensor& s, const SymmetricForm* g_form, double c1212)
        : s_(s), g_(g_form), c1212_(c1212), scale_(std::max(1e-12, s.frobenius())) {}

    int n() const override { return s_.n(); }
    int frame_size() const override { return 4; }
    double scale() const override { return scale_; }

    FrameEval evaluate(const Eigen::MatrixXd& frame) const override {
        const IsoParts p = iso_parts(s_.entries(), frame);
        double w = 0.0;
        if (g_) {
            const Eigen::VectorXd e1 = frame.row(0), e2 = frame.row(1);
            w += e1.dot(g_->mat() * e1) + e2.dot(g_->mat() * e2);
        }
        if (c1212_ != 0.0) {
            const int n = s_.n();
            Eigen::VectorXd om12(p.om13.size());
            wedge_into(frame, 0, 1, n, om12);
            w += c1212_ * om12.dot(s_.entries() * om12);
        }
        // (A + C + W) + l^2 (B + D - W) - 2 l E
        return quad_min(p.A + p.C + w, p.B + p.D - w, p.E);
    }

    std::vector<Eigen::MatrixXd> suggested_frames() const override {
        return eigen_seed_frames(s_.entries(), s_.n(), 3);
    }

private:
    const CurvatureTensor& s_;
    const SymmetricForm* g_;
    double c1212_;
    double scale_;
};

// Condition (iv) of the preliminary pinching set: the plain isotropic value
// minus the quartic penalty on the off-block components.
class G0ivObjective final : public FrameObjective {
public:
    G0ivObjective(const CurvatureTensor& r, double delta, double scal)
        : r_(r), coeff_(std::pow(delta, 0.25) / (scal * scal * scal)),
          scale_(std::max(1e-12, r.frobenius())) {}

    int n() const override { return r_.n(); }
    int frame_size() const override { return 4; }
    double scale() const override { return scale_; }

    FrameEval evaluate(const Eigen::MatrixXd& frame) const override {
        const IsoParts p = iso_parts(r_.entries(), frame);
        const double s1 = 2.0 * (p.w13 - p.w24).squaredNorm();
        const double s2 = 2.0 * (p.w14 + p.w23).squaredNorm();
        const double iso = p.A + p.B + p.C + p.D - 2.0 * p.E;
        return {iso - coeff_ * (s1 + s2) * (s1 + s2), 1.0, 1.0};
    }

    std::vector<Eigen::MatrixXd> suggested_frames() const override {
        return eigen_seed_frames(r_.entries(), r_.n(), 2);
    }

private:
    const CurvatureTensor& r_;
    double coeff_;
    double scale_;
};

// Condition (iv) of E(b): maximize the Ricci-gap deficit over ordered pairs.
class EbIvObjective final : public FrameObjective {
public:
    EbIvObjective(const SymmetricForm& ric_s, const SymmetricForm& ric_t,
                  const CurvatureTensor& t, double omega, double b, double scal_s)
        : ric_s_(ric_s), ric_t_(ric_t), t_(t), omega_(omega), b_(b), scal_s_(scal_s),
          scale_(std::max(1e-12, ric_s.frobenius())) {}

    int n() const override { return t_.n(); }
    int frame_size() const override { return 2; }
    double scale() const override { return scale_; }

    FrameEval evaluate(const Eigen::MatrixXd& frame) const override {
        const int n = t_.n();
        const Eigen::VectorXd e1 = frame.row(0), e2 = frame.row(1);
        const double rs11 = e1.dot(ric_s_.mat() * e1);
        const double rs22 = e2.dot(ric_s_.mat() * e2);
        Eigen::VectorXd om12(pair_count(n));
        int p = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++p)
                om12(p) = e1(i) * e2(j) - e1(j) * e2(i);
        const double t1212 = om12.dot(t_.entries() * om12);
        double sigma = e1.dot(ric_t_.mat() * e1) + e2.dot(ric_t_.mat() * e2) - 2.0 * t1212;
        if (sigma < 0.0) sigma = 0.0;
        const double deficit = (rs22 - rs11)
                             - std::sqrt(omega_) * std::sqrt(scal_s_) * std::sqrt(sigma)
                             - 2.0 * (n - 2.0) * b_ * sigma;
        return {-deficit, 1.0, 1.0};
    }

    std::vector<Eigen::MatrixXd> suggested_frames() const override {
        const int n = t_.n();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ric_s_.mat());
        std::vector<Eigen::MatrixXd> out;
        Eigen::MatrixXd f(2, n);
        f.row(0) = es.eigenvectors().col(0);     // smallest Ric(S) direction
        f.row(1) = es.eigenvectors().col(n - 1); // largest
        out.push_back(f);
        f.row(1) = es.eigenvectors().col(n - 2);
        out.push_back(f);
        return out;
    }

private:
    const SymmetricForm& ric_s_;
    const SymmetricForm& ric_t_;
    const CurvatureTensor& t_;
    double omega_, b_, scal_s_;
    double scale_;
};

ConeMarginReport to_report(const FrameSearchResult& r) {
    ConeMarginReport rep;
    rep.min_value = r.value;
    rep.frame = r.frame;
    rep.lambda = r.lambda;
    rep.mu = r.mu;
    rep.restarts_used = r.restarts_used;
    rep.converged = r.converged;
    rep.gradient_norm = r.gradient_norm;
    return rep;
}

} // namespace

double iso_value(const CurvatureTensor& t, const FourFrame& frame,
                 double lambda, double mu, bool bianchi_free) {
    (void)bianchi_free; // the cross term is evaluated in the universal form
    if (lambda < 0.0 || lambda > 1.0 || mu < 0.0 || mu > 1.0)
        throw std::invalid_argument("iso_value: lambda, mu must lie in [0,1]");
    if (frame.n() != t.n())
        throw std::invalid_argument("iso_value: dimension mismatch");
    if (frame.orthonormality_defect() > FourFrame::kOrthoTol)
        throw std::invalid_argument("iso_value: frame not orthonormal");
    const IsoParts p = iso_parts(t.entries(), frame.rows());
    return biquad(p.A, p.B, p.C, p.D, p.E, lambda, mu);
}

double iso_value_at(const CurvatureTensor& r, const Eigen::MatrixXd& frame,
                    double lambda, double mu) {
    const IsoParts p = iso_parts(r.entries(), frame);
    return biquad(p.A, p.B, p.C, p.D, p.E, lambda, mu);
}

ConeMarginReport min_iso(const CurvatureTensor& r, const IsoMode& mode,
                         const FrameSearchConfig& cfg, std::uint64_t seed) {
    if (r.n() < 4) throw std::invalid_argument("min_iso: need n >= 4");
    // The margin is homogeneous of degree one: search on the unit sphere so
    // tolerances are scale-free, then scale the value back.
    const double s = r.frobenius();
    if (s <= 0.0) {
        ConeMarginReport rep;
        rep.frame = FourFrame::standard(r.n()).rows();
        rep.converged = true;
        rep.restarts_used = 0;
        return rep;
    }
    const CurvatureTensor rn = r * (1.0 / s);
    IsoObjective obj(rn, mode);
    ConeMarginReport rep = to_report(minimize_over_frames(obj, cfg, seed));
    rep.min_value *= s;
    rep.gradient_norm *= s;
    return rep;
}

ConeMarginReport dense_min_iso(const CurvatureTensor& r, const IsoMode& mode,
                               std::size_t samples, int polish_top,
                               std::uint64_t seed, int threads) {
    if (r.n() < 4) throw std::invalid_argument("dense_min_iso: need n >= 4");
    const double s = r.frobenius();
    if (s <= 0.0) {
        ConeMarginReport rep;
        rep.frame = FourFrame::standard(r.n()).rows();
        rep.converged = true;
        return rep;
    }
    const CurvatureTensor rn = r * (1.0 / s);
    IsoObjective obj(rn, mode);
    ConeMarginReport rep = to_report(dense_frame_search(obj, samples, polish_top,
                                                        seed, threads));
    rep.min_value *= s;
    return rep;
}

std::string ConeMarginReport::to_json() const {
    nlohmann::json j;
    j["min"] = min_value;
    j["lambda"] = lambda;
    j["mu"] = mu;
    auto rows = nlohmann::json::array();
    for (int r = 0; r < frame.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (int c = 0; c < frame.cols(); ++c) row.push_back(frame(r, c));
        rows.push_back(std::move(row));
    }
    j["frame"] = std::move(rows);
    j["restarts"] = restarts_used;
    j["converged"] = converged;
    return j.dump(2);
}

namespace {

Membership membership(const CurvatureTensor& r, const IsoMode& mode, double tol,
                      const FrameSearchConfig& cfg, std::uint64_t seed) {
    Membership m;
    m.report = min_iso(r, mode, cfg, seed);
    m.margin = m.report.min_value;
    m.boundary = std::abs(m.margin) < tol;
    m.member = m.margin >= -tol;
    return m;
}

} // namespace

Membership is_pic(const CurvatureTensor& r, double tol, const FrameSearchConfig& cfg,
                  std::uint64_t seed) {
    return membership(r, IsoMode::pic(), tol, cfg, seed);
}

Membership is_pic1(const CurvatureTensor& r, double tol, const FrameSearchConfig& cfg,
                   std::uint64_t seed) {
    return membership(r, IsoMode::pic1(), tol, cfg, seed);
}

Membership is_pic2(const CurvatureTensor& r, double tol, const FrameSearchConfig& cfg,
                   std::uint64_t seed) {
    return membership(r, IsoMode::pic2(), tol, cfg, seed);
}

ConeSummary cone_summary(const CurvatureTensor& r, const FrameSearchConfig& cfg,
                         std::uint64_t seed) {
    ConeSummary s;
    s.pic = min_iso(r, IsoMode::pic(), cfg, seed).min_value;
    s.pic1 = min_iso(r, IsoMode::pic1(), cfg, derive_seed(seed, 1)).min_value;
    s.pic2 = min_iso(r, IsoMode::pic2(), cfg, derive_seed(seed, 2)).min_value;
    // The feasible sets are nested, so any search value majorizes the finer ones.
    s.pic1 = std::min(s.pic1, s.pic);
    s.pic2 = std::min(s.pic2, s.pic1);
    return s;
}

// ---------------------------------------------------------------------------
// Pinching functions.

void PinchingFunctions::spot_check(int n) const {
    if (!f || !g) throw std::invalid_argument("PinchingFunctions: f and g required");
    const double grid[] = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e4, 1e6};
    const int m = static_cast<int>(sizeof(grid) / sizeof(grid[0]));
    for (const auto* fn : {&f, &g}) {
        double prev = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            const double v = (*fn)(grid[i]);
            if (!std::isfinite(v)) throw std::invalid_argument("pinching function not finite");
            if (v < prev - 1e-9 * (1.0 + std::abs(prev)))
                throw std::invalid_argument("pinching function not increasing");
            prev = v;
        }
        for (int i = 0; i + 2 < m; ++i) {
            const double lo = grid[i], hi = grid[i + 2];
            const double mid = 0.5 * (lo + hi);
            const double chord = 0.5 * ((*fn)(lo) + (*fn)(hi));
            if ((*fn)(mid) < chord - 1e-9 * (1.0 + std::abs(chord)))
                throw std::invalid_argument("pinching function not concave");
        }
        const double far = (*fn)(1e8);
        if (far / 1e8 > 1e-3 * (1.0 + std::abs((*fn)(1.0))))
            throw std::invalid_argument("pinching function not sublinear");
    }
    const double theta_cap = 1.0 / (2.0 * n * (n - 1.0));
    if (theta < 0.0)
        throw std::invalid_argument("theta must be nonnegative");
    if (theta >= 10.0 * theta_cap && theta > 0.1)
        throw std::invalid_argument("theta far outside the admissible range");
}

std::function<double(double)> parse_pinching_expr(const std::string& text) {
    const auto star = text.find('*');
    const double c = std::stod(text.substr(0, star == std::string::npos ? text.size() : star));
    if (star == std::string::npos)
        return [c](double) { return c; };
    const std::string shape = text.substr(star + 1);
    if (shape == "sqrt")
        return [c](double s) { return c * std::sqrt(std::max(s, 0.0)); };
    if (shape == "log1p")
        return [c](double s) { return c * std::log1p(std::max(s, 0.0)); };
    if (shape.rfind("pow:", 0) == 0) {
        const double p = std::stod(shape.substr(4));
        if (!(p < 1.0) || p <= 0.0)
            throw std::invalid_argument("pinching pow exponent must lie in (0,1)");
        return [c, p](double s) { return c * std::pow(std::max(s, 0.0), p); };
    }
    throw std::invalid_argument("pinching expression: unknown shape " + shape);
}

ShiftedMargins shifted_predicates(const CurvatureTensor& r, const PinchingFunctions& pf,
                                  const FrameSearchConfig& cfg, std::uint64_t seed) {
    const int n = r.n();
    const double sc = scalar(r);
    ShiftedMargins out;
    {
        CurvatureTensor shifted = r;
        shifted.axpy(-pf.theta * sc, identity_wedge(n));
        out.pic_shift = min_iso(shifted, IsoMode::pic(), cfg, seed).min_value;
    }
    {
        CurvatureTensor shifted = r;
        shifted.axpy(pf.f ? pf.f(std::max(sc, 0.0)) : 0.0, identity_wedge(n));
        out.pic2_shift = min_iso(shifted, IsoMode::pic2(), cfg, derive_seed(seed, 1)).min_value;
    }
    out.ricci_pair = ricci(r).two_smallest_sum() - pf.theta * sc + pf.n_const;
    return out;
}

// ---------------------------------------------------------------------------
// Condition sets.

double EbMargins::worst() const {
    double w = std::min(std::min(psd_T, pic_S_minus_T), std::min(ricci_pair, frame_iv));
    if (!scal_positive) w = std::min(w, -std::numeric_limits<double>::infinity());
    return w;
}

EbMargins check_Eb(const CurvatureTensor& s, const CurvatureTensor& t_witness,
                   const FamilyParams& params, const FrameSearchConfig& cfg,
                   std::uint64_t seed) {
    if (params.family != ConeFamily::C)
        throw std::invalid_argument("check_Eb: family C parameters required");
    if (s.n() != t_witness.n())
        throw std::invalid_argument("check_Eb: dimension mismatch");
    const int n = s.n();
    EbMargins m;
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t_witness.entries(),
                                                          Eigen::EigenvaluesOnly);
        m.psd_T = es.eigenvalues()(0);
    }
    m.pic_S_minus_T = min_iso(s - t_witness, IsoMode::pic(), cfg, seed).min_value;
    const SymmetricForm ric_s = ricci(s);
    const double sc = ric_s.trace();
    m.ricci_pair = ric_s.two_smallest_sum() + 2.0 * params.gamma / n * sc;
    if (sc <= 0.0) {
        m.scal_positive = false;
        m.frame_iv = 0.0;
        return m;
    }
    const SymmetricForm ric_t = ricci(t_witness);
    EbIvObjective obj(ric_s, ric_t, t_witness, params.omega, params.b, sc);
    m.frame_iv = minimize_over_frames(obj, cfg, derive_seed(seed, 1)).value;
    return m;
}

EtildeResult check_Etilde(const CurvatureTensor& s, const FamilyParams& params,
                          const CurvatureTensor* witness, const FrameSearchConfig& cfg,
                          std::uint64_t seed) {
    if (params.family != ConeFamily::Ctilde)
        throw std::invalid_argument("check_Etilde: family Ctilde parameters required");
    EtildeResult out;
    const SymmetricForm h = ricci(s) * std::sqrt(2.0 * params.a);
    const FrameSearchResult zr = minimize_z_quantity(s, &h, 0.0, cfg, seed);
    out.z_margin = zr.value;
    out.z_report = to_report(zr);
    if (witness) {
        const FamilyParams pmax = family_params(params.n, params.b_max, ConeFamily::C);
        const CurvatureTensor inner =
            ell_inverse(pmax.a, pmax.b, ell(params.a, params.b, s));
        out.eb = check_Eb(inner, *witness, pmax, cfg, derive_seed(seed, 1));
        out.conclusive = true;
    }
    return out;
}

double G0Margins::worst() const {
    return std::min(std::min(cond_i, cond_ii), std::min(cond_iii, cond_iv));
}

G0Margins check_G0(const CurvatureTensor& r, double delta, double t, int b_grid,
                   const FrameSearchConfig& cfg, std::uint64_t seed) {
    if (delta <= 0.0) throw std::invalid_argument("check_G0: delta must be positive");
    const int n = r.n();
    const double sc = scalar(r);
    const int grid = std::max(b_grid, 2);
    const double b_top = delta * std::exp(-8.0 * t);

    G0Margins m;
    m.b_grid = grid;
    m.cond_i = std::numeric_limits<double>::infinity();
    m.cond_ii = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd warm;
    for (int j = 0; j < grid; ++j) {
        const double b = b_top * j / (grid - 1);
        const double a = b + 0.5 * (n - 2.0) * b * b;
        const CurvatureTensor s = ell_inverse(a, b, r);
        FrameSearchConfig sub = (j == 0)
            ? cfg
            : FrameSearchConfig::monitor(&warm, std::max(2, cfg.restarts / 8));
        sub.threads = cfg.threads;
        const ConeMarginReport rep = min_iso(s, IsoMode::pic(), sub, derive_seed(seed, j));
        m.cond_i = std::min(m.cond_i, rep.min_value);
        warm = rep.frame;
        const SymmetricForm ric_s = ricci(s);
        m.cond_ii = std::min(m.cond_ii, ric_s.two_smallest_sum()
                                        + 2.0 * std::pow(b, 1.25) * ric_s.trace() + 2.0);
    }
    {
        CurvatureTensor shifted = r;
        shifted.axpy(-4.0 * delta, identity_wedge(n));
        m.cond_iii = min_iso(shifted, IsoMode::pic(), cfg, derive_seed(seed, 1000)).min_value;
    }
    if (sc > 0.0) {
        G0ivObjective obj(r, delta, sc);
        FrameSearchConfig sub = cfg;
        sub.compute_gradient = true;
        const FrameSearchResult res = minimize_over_frames(obj, sub, derive_seed(seed, 2000));
        m.cond_iv = res.value;
        m.iv_converged = res.converged;
    } else {
        m.scal_positive = false;
        m.cond_iv = 0.0;
    }
    return m;
}

FtResult check_Ft(const CurvatureTensor& r, const PinchingFunctions& pf,
                  const FrameSearchConfig& cfg, std::uint64_t seed) {
    const int n = r.n();
    const double sc = std::max(scalar(r), 0.0);
    const double fval = pf.f ? pf.f(sc) : 0.0;
    const double gval = pf.g ? pf.g(sc) : 0.0;
    CurvatureTensor s = r;
    s.axpy(2.0 * gval, identity_wedge(n));
    IsoObjective obj(s, IsoMode::pic2(), fval);
    FtResult out;
    const FrameSearchResult res = minimize_over_frames(obj, cfg, seed);
    out.margin = res.value;
    out.report = to_report(res);
    return out;
}

double lambda_mu_kappa_region(double lambda, double mu) {
    const double l2 = lambda * lambda, m2 = mu * mu;
    return l2 * (1.0 - m2) * (1.0 - m2) + m2 * (1.0 - l2) * (1.0 - l2)
         + (1.0 - l2) * (1.0 - l2) * (1.0 - m2) * (1.0 - m2);
}

FrameSearchResult minimize_z_quantity(const CurvatureTensor& s,
                                      const SymmetricForm* g_form, double c1212,
                                      const FrameSearchConfig& cfg, std::uint64_t seed) {
    ZObjective obj(s, g_form, c1212);
    return minimize_over_frames(obj, cfg, seed);
}

double z_value_at(const CurvatureTensor& s, const SymmetricForm* g_form, double c1212,
                  const Eigen::MatrixXd& frame, double lambda) {
    const IsoParts p = iso_parts(s.entries(), frame);
    double w = 0.0;
    if (g_form) {
        const Eigen::VectorXd e1 = frame.row(0), e2 = frame.row(1);
        w += e1.dot(g_form->mat() * e1) + e2.dot(g_form->mat() * e2);
    }
    if (c1212 != 0.0) {
        Eigen::VectorXd om12(p.om13.size());
        wedge_into(frame, 0, 1, s.n(), om12);
        w += c1212 * om12.dot(s.entries() * om12);
    }
    return (p.A + p.C + w) + lambda * lambda * (p.B + p.D - w) - 2.0 * lambda * p.E;
}

// ---------------------------------------------------------------------------
// Margin-targeted shifting.

double shift_to_margin(const CurvatureTensor& r, const IsoMode& mode, double target,
                       const FrameSearchConfig& cfg, std::uint64_t seed) {
    const ConeMarginReport base = min_iso(r, mode, cfg, seed);
    const double m0 = base.min_value;
    if (mode.tag == IsoMode::Tag::Pic)
        return (target - m0) / 8.0; // the shift moves every frame value by 8c
    const double d = target - m0;
    double lo = std::min(d / 8.0, d / 2.0);
    double hi = std::max(d / 8.0, d / 2.0);
    const CurvatureTensor idw = identity_wedge(r.n());
    Eigen::MatrixXd warm = base.frame;
    const auto margin_at = [&](double c, std::uint64_t k) {
        CurvatureTensor shifted = r;
        shifted.axpy(c, idw);
        FrameSearchConfig sub = FrameSearchConfig::monitor(&warm, 4);
        sub.threads = cfg.threads;
        const ConeMarginReport rep = min_iso(shifted, mode, sub, derive_seed(seed, k));
        warm = rep.frame;
        return rep.min_value;
    };
    // Regula falsi with Illinois damping on margin(c) - target.
    double flo = margin_at(lo, 1) - target;
    double fhi = margin_at(hi, 2) - target;
    int guard = 0;
    while (flo > 0.0 && guard++ < 8) { lo -= (hi - lo); flo = margin_at(lo, 10 + guard) - target; }
    guard = 0;
    while (fhi < 0.0 && guard++ < 8) { hi += (hi - lo); fhi = margin_at(hi, 20 + guard) - target; }
    double c = 0.5 * (lo + hi);
    int side = 0;
    for (int it = 0; it < 48 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
        c = (std::abs(fhi - flo) > 1e-300) ? (lo * fhi - hi * flo) / (fhi - flo)
                                           : 0.5 * (lo + hi);
        if (c <= lo || c >= hi) c = 0.5 * (lo + hi);
        const double fc = margin_at(c, 100 + it) - target;
        if (std::abs(fc) < 1e-10 * (1.0 + std::abs(target))) break;
        if (fc < 0.0) {
            lo = c; flo = fc;
            if (side == -1) fhi *= 0.5;
            side = -1;
        } else {
            hi = c; fhi = fc;
            if (side == 1) flo *= 0.5;
            side = 1;
        }
    }
    return c;
}

} // namespace curvcone
