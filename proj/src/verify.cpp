#include "curvcone/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "curvcone/parallel.hpp"
#include "curvcone/quadratic.hpp"

namespace curvcone {

namespace {

using nlohmann::json;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

struct MarginTracker {
    double worst = std::numeric_limits<double>::infinity();
    json witness;

    void offer(double margin, json w) {
        if (margin < worst) {
            worst = margin;
            witness = std::move(w);
        }
    }
    void merge(const MarginTracker& o) {
        if (o.worst < worst) {
            worst = o.worst;
            witness = o.witness;
        }
    }
};

json frame_to_json(const Eigen::MatrixXd& f) {
    json rows = json::array();
    for (int r = 0; r < f.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < f.cols(); ++c) row.push_back(f(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd frame_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.at(0).size());
    Eigen::MatrixXd f(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) f(r, c) = j.at(r).at(c).get<double>();
    return f;
}

// ---------------------------------------------------------------------------
// Parameter lemma arithmetic.

double params1_cubic(int n, double b) {
    return 2.0 + (n - 8.0) * b - 2.0 * (n + 2.0) * (n - 2.0) * b * b
         - n * (n - 2.0) * (n - 2.0) * b * b * b;
}

double params1_product_margin(int n, double b) {
    const FamilyParams p = family_params(n, b, ConeFamily::C);
    const double s = 2.0 * b + (n - 2.0) * p.a;
    const double c1 = (n - 2.0) / (n - 3.0) + 2.0 * (n - 2.0) / n * s
                    + 8.0 * (n - 3.0) * b * b;
    const double c2 = (n - 2.0) / (n - 3.0) + 2.0 * s;
    return 0.5 * p.omega - c1 * c2;
}

struct Params2Values {
    double b_max, a_max, gamma_max, bt_max, at_max;
};

Params2Values params2_values(int n) {
    Params2Values v;
    v.b_max = b_max_for(n);
    const double u = 2.0 + (n - 2.0) * v.b_max;
    const double w = 2.0 + (n - 3.0) * v.b_max;
    v.a_max = u * u / (2.0 * w) * v.b_max;
    v.gamma_max = v.b_max / w;
    v.bt_max = btilde_max_for(n);
    v.at_max = v.bt_max + 0.5 * (n - 2.0) * v.bt_max * v.bt_max;
    return v;
}

double params2_margin(int n, int ineq) {
    const Params2Values v = params2_values(n);
    const double ratio_b = (1.0 + (n - 2.0) * v.b_max) / (1.0 + (n - 2.0) * v.bt_max);
    const double root = std::sqrt(2.0 * v.at_max);
    switch (ineq) {
        case 1:
            return ratio_b * root
                 - (n * n - 5.0 * n + 4.0) / (n * n - 7.0 * n + 14.0) / (n - 4.0);
        case 2:
            return (v.a_max - v.at_max) / (1.0 + 2.0 * (n - 1.0) * v.at_max)
                 - (v.b_max - v.bt_max) / (1.0 + (n - 2.0) * v.bt_max);
        case 3: {
            const double t1 = (v.a_max - v.at_max) / (1.0 + 2.0 * (n - 1.0) * v.at_max)
                            - (1.0 + v.gamma_max) * (v.b_max - v.bt_max)
                                  / (1.0 + (n - 2.0) * v.bt_max);
            const double t2 = 2.0 * (n - 1.0) * (v.a_max - v.at_max)
                                  / (1.0 + 2.0 * (n - 1.0) * v.at_max)
                            - (n - 2.0) * (v.b_max - v.bt_max)
                                  / (1.0 + (n - 2.0) * v.bt_max);
            return 2.0 * t1 + t2 * root - ratio_b * n * root / (n * n - 5.0 * n + 4.0);
        }
        default:
            throw std::invalid_argument("params2_margin: bad inequality index");
    }
}

double params3_margin(int n, double b, const std::string& check) {
    const double a = b + 0.5 * (n - 2.0) * b * b;
    const Params2Values v = params2_values(n);
    const double zeta = (1.0 + 2.0 * (n - 1.0) * a) / (1.0 + 2.0 * (n - 1.0) * v.a_max)
                      * (1.0 + (n - 2.0) * v.b_max) / (1.0 + (n - 2.0) * b)
                      * (1.0 + v.gamma_max);
    const double zeta_max = (1.0 + 2.0 * (n - 1.0) * v.at_max)
                              / (1.0 + 2.0 * (n - 1.0) * v.a_max)
                          * (1.0 + (n - 2.0) * v.b_max) / (1.0 + (n - 2.0) * v.bt_max)
                          * (1.0 + v.gamma_max);
    if (check == "m1")
        return n * b * b * (1.0 - 2.0 * b)
             - 2.0 * (a - b) * (1.0 - 2.0 * b + n * b * b);
    if (check == "m2")
        return n * n * b * b - 2.0 * (n - 1.0) * (a - b) * (1.0 - 2.0 * b);
    if (check == "factored1") {
        const double direct = n * b * b * (1.0 - 2.0 * b)
                            - 2.0 * (a - b) * (1.0 - 2.0 * b + n * b * b);
        const double factored = b * b * (2.0 - 4.0 * b - n * (n - 2.0) * b * b);
        return 1e-15 - std::abs(direct - factored);
    }
    if (check == "factored2") {
        const double direct = n * n * b * b - 2.0 * (n - 1.0) * (a - b) * (1.0 - 2.0 * b);
        const double factored = b * b * (3.0 * n - 2.0 + 2.0 * (n - 1.0) * (n - 2.0) * b);
        return 1e-15 - std::abs(direct - factored);
    }
    if (check == "zeta_le_1") return 1.0 - zeta;
    if (check == "zeta_display")
        return 1.0 + (n - 2.0) * (1.0 - zeta)
             - 2.0 * zeta * zeta * (n * n - 2.0 * n + 2.0) / ((n - 2.0) * (n - 2.0));
    if (check == "zeta_mono") return zeta_max - zeta;
    if (check == "endpoint") return 1e-12 - std::abs(zeta - zeta_max);
    throw std::invalid_argument("params3_margin: unknown check " + check);
}

double quadratic_psi(int n, double b, double x, double y) {
    const FamilyParams p = family_params(n, b, ConeFamily::C);
    return (2.0 * b + (n - 2.0) * b * b - 2.0 * p.a) * x * y
         + 2.0 * p.a * (x + 2.0) * (y + 2.0) + b * b * (x * x + y * y);
}

// ---------------------------------------------------------------------------
// Trial input generators (shared by the verifiers and witness replay).

CurvatureTensor make_unit_gaussian(int n, std::uint64_t seed) {
    CurvatureTensor r = random_gaussian(n, seed);
    return r * (1.0 / r.frobenius());
}

SymmetricForm make_unit_symmetric(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            m(i, j) = rng.gaussian();
            m(j, i) = m(i, j);
        }
    SymmetricForm h(n, std::move(m));
    return h * (1.0 / std::max(h.frobenius(), 1e-12));
}

Eigen::MatrixXd haar_orthogonal(int n, Rng& rng) {
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
    return orthonormalize_rows(std::move(g));
}

// Weakly two-positive symmetric form, boundary cases included.
SymmetricForm make_two_positive(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd ev(n);
    const double t = std::abs(rng.gaussian());
    ev(0) = -t;
    ev(1) = (rng.uniform() < 0.3) ? t : t + std::abs(rng.gaussian());
    for (int i = 2; i < n; ++i) ev(i) = ev(1) + std::abs(rng.gaussian());
    const Eigen::MatrixXd q = haar_orthogonal(n, rng);
    return {n, q.transpose() * ev.asDiagonal() * q};
}

// Bianchi tensor in PIC, certified by construction: either a PSD Gram square
// (Bianchi-projected, eigenvalue-shifted back to PSD) or a positive
// combination of wedge squares of weakly two-positive forms. The second
// branch reaches PIC members outside PIC2, with boundary-flavored cases.
CurvatureTensor make_pic_sample(int n, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0));
    if (rng.uniform() < 0.45) {
        const int N = pair_count(n);
        const int k = N / 2 + 1;
        Eigen::MatrixXd g(N, k);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < k; ++j) g(i, j) = rng.gaussian();
        Eigen::MatrixXd w = g * g.transpose();
        w /= w.norm();
        CurvatureTensor t = CurvatureTensor(n, std::move(w)).bianchi_projection();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.entries(), Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues()(0);
        const double u = 0.01 + 0.2 * rng.uniform();
        t.axpy(0.5 * (u - std::min(lmin, 0.0)), identity_wedge(n));
        return t;
    }
    const int terms = 1 + static_cast<int>(rng.uniform_index(3));
    CurvatureTensor acc(n);
    for (int t = 0; t < terms; ++t) {
        const SymmetricForm h = make_two_positive(n, derive_seed(seed, 10 + t));
        acc.axpy(0.2 + rng.uniform(), kulkarni_nomizu(h, h));
    }
    acc = acc * (1.0 / acc.frobenius());
    if (rng.uniform() < 0.5) acc.axpy(0.1 * rng.uniform() / 8.0, identity_wedge(n));
    return acc;
}

// Raw pair-symmetric tensor (no Bianchi projection) for the tangent-cone
// statement about R^#.
CurvatureTensor make_nonbianchi(int n, std::uint64_t seed) {
    Rng rng(seed);
    const int N = pair_count(n);
    Eigen::MatrixXd e(N, N);
    for (int p = 0; p < N; ++p)
        for (int q = p; q < N; ++q) {
            e(p, q) = rng.gaussian();
            e(q, p) = e(p, q);
        }
    CurvatureTensor t(n, std::move(e));
    return t * (1.0 / t.frobenius());
}

CurvatureTensor make_psd_gram(int n, std::uint64_t seed) {
    Rng rng(seed);
    const int N = pair_count(n);
    const int k = N / 2 + 1;
    Eigen::MatrixXd g(N, k);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < k; ++j) g(i, j) = rng.gaussian();
    Eigen::MatrixXd w = g * g.transpose();
    w /= w.norm();
    return {n, std::move(w)};
}

struct InterpolationInputs {
    CurvatureTensor s;
    SymmetricForm h0;
};

InterpolationInputs interpolation_inputs(int n, std::uint64_t seed) {
    InterpolationInputs in;
    in.s = make_pic_sample(n, derive_seed(seed, 11));
    in.s = in.s * (1.0 / in.s.frobenius());
    // A strict id^id slack keeps the sample in the PIC interior, so the
    // shift root below exists and the minimizer stays off lambda = 1.
    Rng rng(derive_seed(seed, 12));
    in.s.axpy((0.03 + 0.05 * rng.uniform()) / 8.0, identity_wedge(n));
    in.h0 = make_unit_symmetric(n, derive_seed(seed, 13));
    return in;
}

// ---------------------------------------------------------------------------

LemmaReport base_report(std::string id, std::vector<int> ns) {
    LemmaReport r;
    r.lemma_id = std::move(id);
    r.n_range = std::move(ns);
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// Parameter lemmas.

LemmaReport verify_parameters1(const std::vector<int>& n_list, int b_grid_size) {
    Stopwatch sw;
    LemmaReport rep = base_report("parameters1", n_list);
    rep.tol = kStrictTol;
    MarginTracker tracker;
    long informational = 0;
    for (int n : n_list) {
        const bool in_hyp = n >= 12;
        if (!in_hyp) ++informational;
        const double bm = b_max_for(n);
        for (int j = 1; j <= b_grid_size; ++j) {
            const double b = bm * j / b_grid_size;
            const double m1 = params1_cubic(n, b);
            const double m2 = params1_product_margin(n, b);
            if (in_hyp) {
                tracker.offer(m1, {{"lemma", "parameters1"}, {"n", n}, {"b", b}, {"ineq", 1}});
                tracker.offer(m2, {{"lemma", "parameters1"}, {"n", n}, {"b", b}, {"ineq", 2}});
            }
        }
        rep.grid_points += 2L * b_grid_size;
    }
    rep.worst_margin = tracker.worst;
    rep.worst_witness = std::move(tracker.witness);
    // The cubic is claimed strict; the product bound is non-strict.
    rep.passed = rep.worst_margin >= kStrictTol
              || (rep.worst_witness.value("ineq", 1) == 2 && rep.worst_margin >= -kSlackTol);
    if (informational > 0)
        rep.note = "n < 12 entries are informational (outside the hypothesis)";
    rep.runtime_ms = sw.ms();
    return rep;
}

LemmaReport verify_parameters2(const std::vector<int>& n_list) {
    Stopwatch sw;
    LemmaReport rep = base_report("parameters2", n_list);
    rep.tol = kSlackTol;
    MarginTracker tracker;
    for (int n : n_list) {
        if (n < 12) continue;
        for (int ineq = 1; ineq <= 3; ++ineq) {
            tracker.offer(params2_margin(n, ineq),
                          {{"lemma", "parameters2"}, {"n", n}, {"ineq", ineq}});
            ++rep.grid_points;
        }
    }
    rep.worst_margin = tracker.worst;
    rep.worst_witness = std::move(tracker.witness);
    rep.passed = rep.worst_margin >= -kSlackTol;
    rep.runtime_ms = sw.ms();
    return rep;
}

LemmaReport verify_parameters3(const std::vector<int>& n_list, int b_grid_size) {
    Stopwatch sw;
    LemmaReport rep = base_report("parameters3", n_list);
    rep.tol = kSlackTol;
    MarginTracker tracker;
    static const char* kChecks[] = {"m1", "m2", "factored1", "factored2",
                                    "zeta_le_1", "zeta_display", "zeta_mono"};
    for (int n : n_list) {
        if (n < 12) continue;
        const double bt = btilde_max_for(n);
        for (int j = 1; j <= b_grid_size; ++j) {
            const double b = bt * j / b_grid_size;
            for (const char* check : kChecks)
                tracker.offer(params3_margin(n, b, check),
                              {{"lemma", "parameters3"}, {"n", n}, {"b", b}, {"check", check}});
            rep.grid_points += 7;
        }
        tracker.offer(params3_margin(n, bt, "endpoint"),
                      {{"lemma", "parameters3"}, {"n", n}, {"b", bt}, {"check", "endpoint"}});
        ++rep.grid_points;
    }
    rep.worst_margin = tracker.worst;
    rep.worst_witness = std::move(tracker.witness);
    rep.passed = rep.worst_margin >= -kSlackTol;
    rep.runtime_ms = sw.ms();
    return rep;
}

LemmaReport verify_quadratic_inequality(int n, double b, int grid, int refine) {
    Stopwatch sw;
    LemmaReport rep = base_report("quadratic_inequality", {n});
    rep.tol = kSlackTol;
    const FamilyParams p = family_params(n, b, ConeFamily::C);
    const double x_min = -2.0 * (2.0 + (n - 2.0) * b) / (2.0 + (n - 3.0) * b);
    const double beta = 2.0 * b + (n - 2.0) * b * b;

    // Coercive truncation radius: psi >= b^2 s^2/2 + c1 s + c0 on the domain
    // (s = x + y), so beyond the outer root the far field is positive.
    const double c1 = beta * x_min + 4.0 * p.a;
    const double c0 = 8.0 * p.a - beta * x_min * x_min;
    const double disc = std::sqrt(std::max(c1 * c1 - 2.0 * b * b * c0, 0.0));
    const double rho = (std::abs(c1) + disc) / (b * b) + std::abs(x_min) + 10.0;

    const int g = std::max(grid, 64);
    MarginTracker tracker;
    double bx = x_min, by = x_min;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const double x = x_min + (rho - x_min) * i / (g - 1);
            const double y = x_min + (rho - x_min) * j / (g - 1);
            const double v = quadratic_psi(n, b, x, y);
            if (v < tracker.worst) { bx = x; by = y; }
            tracker.offer(v, {{"lemma", "quadratic_inequality"},
                              {"n", n}, {"b", b}, {"x", x}, {"y", y}});
        }
    rep.grid_points = static_cast<long>(g) * g;

    // Pattern-search refinement, clipped to the domain.
    double step = (rho - x_min) / (g - 1);
    for (int it = 0; it < std::max(refine, 1) * 40 && step > 1e-12; ++it) {
        bool improved = false;
        for (const auto& d : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0},
                              {1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}}) {
            const double x = std::max(x_min, bx + step * d.first);
            const double y = std::max(x_min, by + step * d.second);
            const double v = quadratic_psi(n, b, x, y);
            if (v < tracker.worst) {
                tracker.offer(v, {{"lemma", "quadratic_inequality"},
                                  {"n", n}, {"b", b}, {"x", x}, {"y", y}});
                bx = x;
                by = y;
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }

    // Boundary line value, Hessian saddle, and boundary attainment.
    bool aux_ok = true;
    for (int j = 0; j < 64; ++j) {
        const double y = x_min + (rho - x_min) * j / 63.0;
        const double diff = std::abs(quadratic_psi(n, b, x_min, y) - b * b * y * y);
        if (diff > 1e-11 * std::max(1.0, b * b * y * y)) aux_ok = false;
    }
    const double h_low = 2.0 * b * b - beta, h_high = 2.0 * b * b + beta;
    if (!(h_low < 0.0 && h_high > 0.0)) aux_ok = false;
    const double boundary_dist = std::min(bx - x_min, by - x_min);
    if (boundary_dist > 1e-6) aux_ok = false;

    rep.worst_margin = tracker.worst;
    rep.worst_witness = std::move(tracker.witness);
    rep.passed = rep.worst_margin >= -kSlackTol && aux_ok;
    if (!aux_ok) rep.note = "auxiliary boundary/saddle checks failed";
    rep.runtime_ms = sw.ms();
    return rep;
}

// ---------------------------------------------------------------------------
// Appendix lemmas.

LemmaReport verify_algebraic_fact(int n, double zeta, double rho, int trials,
                                  std::uint64_t seed) {
    Stopwatch sw;
    LemmaReport rep = base_report("algebraic_fact", {n});
    rep.tol = 1e-10;
    if (zeta < 0.0 || zeta > 1.0 || rho <= 0.0 || rho > 1.0)
        throw std::invalid_argument("verify_algebraic_fact: need 0 <= zeta <= 1, 0 < rho <= 1");
    MarginTracker tracker;
    const double rhs = 2.0 * ((n - 2.0) * (1.0 - zeta)
                              - 2.0 * zeta * zeta * rho * (n * n - 2.0 * n + 2.0)
                                    / ((n - 2.0) * (n - 2.0)));
    long starved = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t ts = derive_seed(seed, trial);
        Rng rng(ts);
        // Spectrum with trace n, largest eigenvalue <= n/2, and any pair sum
        // >= 2(1-zeta); boundary-active draws included.
        Eigen::VectorXd x(n);
        double mean = 0.0;
        for (int i = 0; i < n; ++i) { x(i) = rng.gaussian(); mean += x(i); }
        x.array() -= mean / n;
        Eigen::VectorXd sorted = x;
        std::sort(sorted.data(), sorted.data() + n);
        double t_cap = std::numeric_limits<double>::infinity();
        if (sorted(0) + sorted(1) < 0.0) t_cap = 2.0 * zeta / (-(sorted(0) + sorted(1)));
        if (sorted(n - 1) > 0.0)
            t_cap = std::min(t_cap, (n / 2.0 - 1.0) / sorted(n - 1));
        if (!std::isfinite(t_cap)) t_cap = 1.0;
        if (t_cap < 0.0) { ++starved; continue; }
        const double t = (rng.uniform() < 0.25) ? t_cap : t_cap * rng.uniform();
        Eigen::VectorXd lam = Eigen::VectorXd::Ones(n) + t * x;

        // Exact minimum over orthonormal pairs is attained at eigen-pairs.
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double lhs = (n - 2.0) * (lam(i) + lam(j))
                                 - rho * ((lam(i) - 1.0) * (lam(i) - 1.0)
                                          + (lam(j) - 1.0) * (lam(j) - 1.0));
                json w = {{"lemma", "algebraic_fact"}, {"n", n}, {"zeta", zeta},
                          {"rho", rho}, {"i", i}, {"j", j}};
                w["spectrum"] = std::vector<double>(lam.data(), lam.data() + n);
                tracker.offer(lhs - rhs, std::move(w));
            }
        // Random orthonormal pairs exercise the bilinear-form path.
        const Eigen::MatrixXd h = lam.asDiagonal();
        const SymmetricForm hf(n, h);
        const SymmetricForm h0 = hf.tracefree();
        for (int k = 0; k < 4; ++k) {
            Eigen::MatrixXd pair(2, n);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < n; ++c) pair(r, c) = rng.gaussian();
            pair = orthonormalize_rows(std::move(pair));
            const Eigen::VectorXd e1 = pair.row(0), e2 = pair.row(1);
            const double lhs = (n - 2.0) / n * hf.trace()
                                   * (e1.dot(h * e1) + e2.dot(h * e2))
                             - rho * (e1.dot(h0.square().mat() * e1)
                                      + e2.dot(h0.square().mat() * e2));
            json w = {{"lemma", "algebraic_fact"}, {"n", n}, {"zeta", zeta},
                      {"rho", rho}, {"pair", frame_to_json(pair)}};
            w["spectrum"] = std::vector<double>(lam.data(), lam.data() + n);
            tracker.offer(lhs - rhs * hf.trace() * hf.trace() / (n * n), std::move(w));
        }
        ++rep.trials;
    }
    rep.inconclusive = starved;
    if (starved > trials / 2) rep.note = "sampler starvation";
    rep.worst_margin = tracker.worst;
    rep.worst_witness = std::move(tracker.witness);
    rep.passed = rep.worst_margin >= -rep.tol && starved <= trials / 2;
    rep.runtime_ms = sw.ms();
    return rep;
}

LemmaReport verify_appendixA_small(int trials, std::uint64_t seed,
                                   const std::vector<int>& n_list, int threads) {
    Stopwatch sw;
    LemmaReport rep = base_report("appendixA_small", n_list);
    rep.tol = 1e-7;
    std::vector<MarginTracker> trackers(n_list.size() * static_cast<std::size_t>(trials));
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const int n = n_list[ni];
        parallel_for(trials, threads, [&, n, ni](std::size_t trial) {
            MarginTracker& tk = trackers[ni * trials + trial];
            const std::uint64_t ts = derive_seed(derive_seed(seed, ni), trial);
            // Wedge product of a weakly two-positive form lies in PIC.
            {
                const SymmetricForm h = make_two_positive(n, derive_seed(ts, 1));
                const CurvatureTensor hh = kulkarni_nomizu(h, h);
                const double scale = std::max(1.0, hh.frobenius());
                FrameSearchConfig cfg = FrameSearchConfig::light(8);
                const ConeMarginReport r =
                    min_iso(hh, IsoMode::pic(), cfg, derive_seed(ts, 2));
                tk.offer(r.min_value / scale,
                         {{"lemma", "appendixA_small"}, {"part", "wedge_product"},
                          {"n", n}, {"trial_seed", ts}, {"frame", frame_to_json(r.frame)},
                          {"lambda", r.lambda}, {"mu", r.mu}, {"scale", scale}});
            }
            // Ricci eigenvalue bounds for PIC members.
            {
                const CurvatureTensor s = make_pic_sample(n, derive_seed(ts, 3));
                const SymmetricForm ric = ricci(s);
                const Eigen::VectorXd ev = ric.eigenvalues();
                const double scale = std::max(1.0, s.frobenius());
                const double m_top = (0.5 * ric.trace() - ev(n - 1)) / scale;
                tk.offer(m_top, {{"lemma", "appendixA_small"}, {"part", "ricci_max"},
                                 {"n", n}, {"trial_seed", ts}, {"scale", scale}});
                const double m_four = (ev(0) + ev(1) + ev(2) + ev(3)) / scale;
                tk.offer(m_four, {{"lemma", "appendixA_small"}, {"part", "four_positive"},
                                  {"n", n}, {"trial_seed", ts}, {"scale", scale}});
            }
        });
        rep.trials += trials;
    }
    MarginTracker all;
    for (const auto& tk : trackers) all.merge(tk);
    rep.worst_margin = all.worst;
    rep.worst_witness = std::move(all.witness);
    rep.passed = rep.worst_margin >= -rep.tol;
    rep.runtime_ms = sw.ms();
    return rep;
}

LemmaReport verify_pic_to_pic1(int n, int trials, std::uint64_t seed, int threads) {
    Stopwatch sw;
    LemmaReport rep = base_report("pic_to_pic1", {n});
    rep.tol = 1e-7;
    if (n < 5) throw std::invalid_argument("verify_pic_to_pic1: need n >= 5");
    std::vector<MarginTracker> trackers(trials);
    parallel_for(trials, threads, [&](std::size_t trial) {
        const std::uint64_t ts = derive_seed(seed, trial);
        const CurvatureTensor s = make_pic_sample(n, ts);
        const SymmetricForm g = ricci(s) * (1.0 / (n - 4.0));
        FrameSearchConfig cfg = FrameSearchConfig::light(8);
        const FrameSearchResult res =
            minimize_z_quantity(s, &g, -2.0 / (n - 4.0), cfg, derive_seed(ts, 5));
        const double scale = std::max(1.0, s.frobenius());
        trackers[trial].offer(res.value / scale,
                              {{"lemma", "pic_to_pic1"}, {"n", n}, {"trial_seed", ts},
                               {"frame", frame_to_json(res.frame)},
                               {"lambda", res.lambda}, {"scale", scale}});
    });
    MarginTracker all;
    for (const auto& tk : trackers) all.merge(tk);
    rep.trials = trials;
    rep.worst_margin = all.worst;
    rep.worst_witness = std::move(all.witness);
    rep.passed = rep.worst_margin >= -rep.tol;
    rep.runtime_ms = sw.ms();
    return rep;
}

LemmaReport verify_extension(int n, int trials, std::uint64_t seed, int threads) {
    Stopwatch sw;
    LemmaReport rep = base_report("extension", {n});
    rep.tol = 1e-7;
    const double band = 1e-5;
    std::vector<MarginTracker> trackers(trials);
    std::vector<long> skipped(trials, 0);
    parallel_for(trials, threads, [&](std::size_t trial) {
        const std::uint64_t ts = derive_seed(seed, trial);
        Rng rng(derive_seed(ts, 0));
        CurvatureTensor s = make_unit_gaussian(n, derive_seed(ts, 1));
        const SymmetricForm h = make_unit_symmetric(n, derive_seed(ts, 2)) * 0.5;
        // Spread samples across the membership boundary.
        s.axpy(rng.uniform(-0.05, 0.08), identity_wedge(n));

        FrameSearchConfig cfg = FrameSearchConfig::light(8);
        const FrameSearchResult zres =
            minimize_z_quantity(s, &h, 0.0, cfg, derive_seed(ts, 3));
        const CurvatureTensor ext = extend(s, h);
        // Seed the extended search with the frame induced by the Z minimizer.
        Eigen::MatrixXd induced = Eigen::MatrixXd::Zero(4, n + 1);
        induced.block(0, 0, 4, n) = zres.frame;
        const double lam = zres.lambda;
        induced.row(3) *= lam;
        induced(3, n) = std::sqrt(std::max(0.0, 1.0 - lam * lam));
        FrameSearchConfig ecfg = FrameSearchConfig::light(8);
        ecfg.warm_start = &induced;
        const ConeMarginReport eres =
            min_iso(ext, IsoMode::pic(), ecfg, derive_seed(ts, 4));

        // Restriction: the extended minimum cannot exceed the Z minimum.
        const double m1 = eres.min_value;
        const double m2 = zres.value;
        trackers[trial].offer(m2 - m1 + 1e-9,
                              {{"lemma", "extension"}, {"part", "restriction"}, {"n", n},
                               {"trial_seed", ts},
                               {"frame5", frame_to_json(eres.frame)},
                               {"lambda5", eres.lambda}, {"mu5", eres.mu},
                               {"frame4", frame_to_json(zres.frame)},
                               {"lambda4", zres.lambda}});
        // Sign agreement away from the boundary band.
        if (std::abs(m1) > band && std::abs(m2) > band) {
            const double agree = (m1 > 0) == (m2 > 0) ? std::min(std::abs(m1), std::abs(m2))
                                                      : -std::min(std::abs(m1), std::abs(m2));
            trackers[trial].offer(agree,
                                  {{"lemma", "extension"}, {"part", "sign"}, {"n", n},
                                   {"trial_seed", ts},
                                   {"frame5", frame_to_json(eres.frame)},
                                   {"lambda5", eres.lambda}, {"mu5", eres.mu},
                                   {"frame4", frame_to_json(zres.frame)},
                                   {"lambda4", zres.lambda}});
        } else {
            skipped[trial] = 1;
        }
    });
    MarginTracker all;
    for (const auto& tk : trackers) all.merge(tk);
    for (long sk : skipped) rep.inconclusive += sk;
    rep.trials = trials;
    rep.worst_margin = all.worst;
    rep.worst_witness = std::move(all.witness);
    rep.passed = rep.worst_margin >= -rep.tol;
    rep.runtime_ms = sw.ms();
    return rep;
}

namespace {

// Shared by the verifier and its replay: the interpolation inequality margin
// at a given shift and minimizer.
double interpolation_margin_at(const CurvatureTensor& s, const SymmetricForm& h0,
                               double shift, const Eigen::MatrixXd& frame, double lam) {
    const int n = s.n();
    const SymmetricForm h = h0 + SymmetricForm::identity(n) * shift;
    const CurvatureTensor qs = hamilton_q(s);
    const CurvatureTensor hh = kulkarni_nomizu(h, h);
    const SymmetricForm sh = star(s, h);
    const Eigen::VectorXd e1 = frame.row(0), e2 = frame.row(1);
    const double h11 = e1.dot(h.mat() * e1), h22 = e2.dot(h.mat() * e2);
    const double lhs = iso_value_at(qs, frame, lam, 1.0)
                     + iso_value_at(hh, frame, lam, 1.0)
                     + 2.0 * (1.0 - lam * lam)
                           * (e1.dot(sh.mat() * e1) + e2.dot(sh.mat() * e2));
    const double rhs = (1.0 + lam * lam) * (h11 + h22) * (h11 + h22);
    return lhs - rhs;
}

} // namespace

LemmaReport verify_interpolation(int n, int trials, std::uint64_t seed, int threads) {
    Stopwatch sw;
    LemmaReport rep = base_report("interpolation", {n});
    rep.tol = 1e-7;
    std::vector<MarginTracker> trackers(trials);
    std::vector<long> inconclusive(trials, 0);
    parallel_for(trials, threads, [&](std::size_t trial) {
        bool done = false;
        for (int attempt = 0; attempt < 8 && !done; ++attempt) {
            const std::uint64_t ts = derive_seed(derive_seed(seed, trial), attempt);
            const InterpolationInputs in = interpolation_inputs(n, ts);
            const SymmetricForm id = SymmetricForm::identity(n);

            FrameSearchConfig cfg = FrameSearchConfig::light(8);
            const auto zmin = [&](double shift, std::uint64_t k,
                                  const Eigen::MatrixXd* warm) {
                const SymmetricForm h = in.h0 + id * shift;
                FrameSearchConfig sub = warm ? FrameSearchConfig::monitor(warm, 3) : cfg;
                return minimize_z_quantity(in.s, &h, 0.0, sub, derive_seed(ts, 100 + k));
            };

            // Bracket the shift that zeroes the Z minimum.
            FrameSearchResult lo_res = zmin(0.0, 0, nullptr);
            double lo = 0.0, hi = 0.0;
            Eigen::MatrixXd warm = lo_res.frame;
            if (lo_res.value < 0.0) {
                hi = -lo_res.value; // slope is at most 2
                FrameSearchResult hi_res = zmin(hi, 1, &warm);
                int guard = 0;
                while (hi_res.value < 0.0 && guard++ < 12) {
                    hi *= 2.0;
                    hi_res = zmin(hi, 1 + guard, &warm);
                }
                if (hi_res.value < 0.0) continue;
            } else {
                lo = -(std::abs(lo_res.value) + 0.05);
                FrameSearchResult lres = zmin(lo, 2, &warm);
                int guard = 0;
                while (lres.value > 0.0 && guard++ < 12) {
                    lo *= 2.0;
                    lres = zmin(lo, 20 + guard, &warm);
                }
                if (lres.value > 0.0) continue;
                hi = 0.0;
            }
            double mid = 0.5 * (lo + hi);
            FrameSearchResult mid_res;
            for (int it = 0; it < 40; ++it) {
                mid = 0.5 * (lo + hi);
                mid_res = zmin(mid, 40 + it, &warm);
                warm = mid_res.frame;
                if (mid_res.value < 0.0) lo = mid; else hi = mid;
            }
            mid = hi;
            mid_res = zmin(mid, 99, &warm);
            if (std::abs(mid_res.value) > 1e-6 || mid_res.lambda > 1.0 - 1e-3) continue;

            const double margin =
                interpolation_margin_at(in.s, in.h0, mid, mid_res.frame, mid_res.lambda);
            const double scale = 1.0 + in.h0.frobenius() + std::abs(mid);
            trackers[trial].offer(margin / (scale * scale),
                                  {{"lemma", "interpolation"}, {"n", n},
                                   {"trial_seed", ts}, {"shift", mid},
                                   {"frame", frame_to_json(mid_res.frame)},
                                   {"lambda", mid_res.lambda},
                                   {"scale", scale}});
            done = true;
        }
        if (!done) inconclusive[trial] = 1;
    });
    MarginTracker all;
    for (const auto& tk : trackers) all.merge(tk);
    for (long v : inconclusive) rep.inconclusive += v;
    rep.trials = trials;
    rep.worst_margin = all.worst;
    rep.worst_witness = std::move(all.witness);
    rep.passed = rep.worst_margin >= -rep.tol
              && rep.inconclusive <= trials / 20; // < 5 percent
    rep.runtime_ms = sw.ms();
    return rep;
}

LemmaReport verify_sharp_tangent(int n, int trials, std::uint64_t seed, int threads) {
    Stopwatch sw;
    LemmaReport rep = base_report("sharp_tangent", {n});
    rep.tol = 1e-7;
    std::vector<MarginTracker> trackers(trials);
    std::vector<long> inconclusive(trials, 0);
    parallel_for(trials, threads, [&](std::size_t trial) {
        const std::uint64_t ts = derive_seed(seed, trial);
        CurvatureTensor u = make_nonbianchi(n, derive_seed(ts, 1));
        FrameSearchConfig cfg = FrameSearchConfig::light(10);
        // Shift to the PIC boundary; the PIC margin responds exactly by 8c.
        ConeMarginReport r = min_iso(u, IsoMode::pic(), cfg, derive_seed(ts, 2));
        double c = -r.min_value / 8.0;
        u.axpy(c, identity_wedge(n));
        Eigen::MatrixXd warm = r.frame;
        for (int fix = 0; fix < 3; ++fix) {
            FrameSearchConfig sub = FrameSearchConfig::monitor(&warm, 4);
            r = min_iso(u, IsoMode::pic(), sub, derive_seed(ts, 3 + fix));
            warm = r.frame;
            if (std::abs(r.min_value) < 1e-9) break;
            const double dc = -r.min_value / 8.0;
            u.axpy(dc, identity_wedge(n));
            c += dc;
        }
        if (std::abs(r.min_value) > 1e-8) {
            inconclusive[trial] = 1;
            return;
        }
        Rng rng(derive_seed(ts, 9));
        const double p_scale = (rng.uniform() < 0.15) ? 0.0 : 1.0; // include P = 0
        const CurvatureTensor p = make_psd_gram(n, derive_seed(ts, 4)) * p_scale;
        CurvatureTensor s = u + p;
        const CurvatureTensor sh = sharp(s);
        const double val = iso_value_at(sh, r.frame, 1.0, 1.0);
        const double scale = std::max(1.0, s.frobenius() * s.frobenius());
        trackers[trial].offer(val / scale,
                              {{"lemma", "sharp_tangent"}, {"n", n}, {"trial_seed", ts},
                               {"c_shift", c}, {"p_scale", p_scale},
                               {"frame", frame_to_json(r.frame)}, {"scale", scale}});
    });
    MarginTracker all;
    for (const auto& tk : trackers) all.merge(tk);
    for (long v : inconclusive) rep.inconclusive += v;
    rep.trials = trials;
    rep.worst_margin = all.worst;
    rep.worst_witness = std::move(all.witness);
    rep.passed = rep.worst_margin >= -rep.tol && rep.inconclusive <= trials / 20;
    rep.runtime_ms = sw.ms();
    return rep;
}

namespace {

struct SurgeryCase {
    CurvatureTensor r;        // pre-surgery neck model
    CurvatureTensor r_tilde;  // transformed tensor (margin checks)
    CurvatureTensor residual; // r_tilde - (1-w) r - (w/2) id^id, term by term
    double w = 0.0;
    double scal_gain = 0.0;   // scal(r_tilde) - scal(r)
};

// The conformal terms sit far below the cylinder entries at small z, so the
// residual and the scalar gain are assembled analytically instead of by
// subtracting nearly equal tensors.
SurgeryCase surgery_case(int n, double z, double pert, std::uint64_t seed) {
    SurgeryCase out;
    out.r = cylinder_tensor(n, 1.0);
    if (pert > 0.0) {
        CurvatureTensor noise = make_unit_gaussian(n, seed);
        out.r.axpy(pert, noise);
    }
    const double phi = std::exp(-1.0 / z);
    const double dphi = phi / (z * z);
    const double ddphi = phi * (1.0 / (z * z * z * z) - 2.0 / (z * z * z));
    // Height-function Hessian on the product cylinder: the z-direction is
    // flat, so D^2 phi = phi'' dz x dz.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    m(n - 1, n - 1) = ddphi + dphi * dphi;
    m -= 0.5 * dphi * dphi * Eigen::MatrixXd::Identity(n, n);
    const SymmetricForm conf(n, std::move(m));
    const CurvatureTensor conf_wedge = kulkarni_nomizu(conf, SymmetricForm::identity(n));
    const double e2phi = std::exp(2.0 * phi);
    const double e2phi_m1 = std::expm1(2.0 * phi);
    out.w = std::exp(-1.0 / z) / (z * z * z * z);

    out.r_tilde = out.r * e2phi;
    out.r_tilde.axpy(e2phi, conf_wedge);

    // residual = (e^{2phi} - 1 + w) R + e^{2phi} M^id - (w/2) id^id
    out.residual = out.r * (e2phi_m1 + out.w);
    out.residual.axpy(e2phi, conf_wedge);
    out.residual.axpy(-0.5 * out.w, identity_wedge(n));

    out.scal_gain = e2phi_m1 * scalar(out.r) + e2phi * 2.0 * (n - 1.0) * conf.trace();
    return out;
}

} // namespace

LemmaReport verify_surgery_transform(int n, const std::vector<double>& z_grid,
                                     double neck_perturbation, std::uint64_t seed) {
    Stopwatch sw;
    LemmaReport rep = base_report("surgery_transform", {n});
    rep.tol = 1e-9;
    MarginTracker tracker;
    std::ostringstream note;
    for (double z : z_grid) {
        if (!(z > 0.0) || z > 0.1)
            throw std::invalid_argument("verify_surgery_transform: z must lie in (0, 1/10]");
        const std::uint64_t zs = derive_seed(seed, static_cast<std::uint64_t>(z * 1e6));
        const SurgeryCase sc = surgery_case(n, z, neck_perturbation, zs);
        // Scalar-curvature gain, normalized by the leading weight w.
        tracker.offer(sc.scal_gain / sc.w,
                      {{"lemma", "surgery_transform"}, {"part", "scal"},
                       {"n", n}, {"z", z}, {"pert", neck_perturbation},
                       {"pert_seed", zs}});
        const double ratio = sc.residual.entries().norm() / sc.w;
        char line[128];
        std::snprintf(line, sizeof(line), "z=%g ratio=%.4f; ", z, ratio);
        note << line;
        if (z <= 0.02 + 1e-12) {
            tracker.offer(0.2 - ratio, {{"lemma", "surgery_transform"}, {"part", "ratio"},
                                        {"n", n}, {"z", z}, {"pert", neck_perturbation},
                                        {"pert_seed", zs}});
        }
        // Convex-combination echo: the transformed tensor keeps the PIC
        // margin when the input is in the cone.
        FrameSearchConfig cfg = FrameSearchConfig::light(10);
        const ConeMarginReport pic_r = min_iso(sc.r, IsoMode::pic(), cfg, derive_seed(zs, 1));
        if (pic_r.min_value > 1e-8) {
            const ConeMarginReport pic_rt =
                min_iso(sc.r_tilde, IsoMode::pic(), cfg, derive_seed(zs, 2));
            tracker.offer(pic_rt.min_value,
                          {{"lemma", "surgery_transform"}, {"part", "pic"},
                           {"n", n}, {"z", z}, {"pert", neck_perturbation},
                           {"pert_seed", zs}, {"frame", frame_to_json(pic_rt.frame)},
                           {"lambda", pic_rt.lambda}, {"mu", pic_rt.mu}});
        }
        ++rep.grid_points;
    }
    rep.note = note.str();
    rep.worst_margin = tracker.worst;
    rep.worst_witness = std::move(tracker.witness);
    rep.passed = rep.worst_margin >= -rep.tol;
    rep.runtime_ms = sw.ms();
    return rep;
}

// ---------------------------------------------------------------------------

VerifyConfig VerifyConfig::defaults() {
    VerifyConfig c;
    for (int n = 12; n <= 20; ++n) c.n_list.push_back(n);
    c.n_list_small = {5, 8, 12};
    return c;
}

std::vector<LemmaReport> verify_all(const VerifyConfig& cfg) {
    std::vector<LemmaReport> out;
    out.push_back(verify_parameters1(cfg.n_list, cfg.b_grid));
    out.push_back(verify_parameters2(cfg.n_list));
    out.push_back(verify_parameters3(cfg.n_list, cfg.b_grid));
    const int n0 = cfg.n_list.empty() ? 12 : cfg.n_list.front();
    if (n0 >= 12) {
        out.push_back(verify_quadratic_inequality(n0, b_max_for(n0), 400, 4));
        out.push_back(verify_quadratic_inequality(n0, 0.25 * b_max_for(n0), 400, 4));
    }
    for (double zeta : {0.0, 0.5, 1.0})
        out.push_back(verify_algebraic_fact(n0 >= 12 ? n0 : 12, zeta, 1.0,
                                            cfg.trials, derive_seed(cfg.seed, 17)));
    out.push_back(verify_appendixA_small(cfg.trials, derive_seed(cfg.seed, 1),
                                         cfg.n_list_small, cfg.threads));
    for (int n : cfg.n_list_small) {
        out.push_back(verify_pic_to_pic1(n, cfg.trials, derive_seed(cfg.seed, 2), cfg.threads));
        out.push_back(verify_extension(n, cfg.trials, derive_seed(cfg.seed, 3), cfg.threads));
        out.push_back(verify_interpolation(n, cfg.trials, derive_seed(cfg.seed, 4),
                                           cfg.threads));
        out.push_back(verify_sharp_tangent(n, cfg.trials, derive_seed(cfg.seed, 5),
                                           cfg.threads));
    }
    out.push_back(verify_surgery_transform(12, {0.01, 0.02, 0.05}, 0.0,
                                           derive_seed(cfg.seed, 6)));
    out.push_back(verify_surgery_transform(12, {0.01, 0.02}, 0.01,
                                           derive_seed(cfg.seed, 7)));
    return out;
}

// ---------------------------------------------------------------------------
// Witness replay.

double replay_witness(const LemmaReport& report) {
    const json& w = report.worst_witness;
    if (w.is_null()) throw std::invalid_argument("replay_witness: empty witness");
    const std::string lemma = w.value("lemma", report.lemma_id);

    if (lemma == "parameters1") {
        const int n = w["n"];
        const double b = w["b"];
        return w["ineq"] == 1 ? params1_cubic(n, b) : params1_product_margin(n, b);
    }
    if (lemma == "parameters2") return params2_margin(w["n"], w["ineq"]);
    if (lemma == "parameters3") return params3_margin(w["n"], w["b"], w["check"]);
    if (lemma == "quadratic_inequality")
        return quadratic_psi(w["n"], w["b"], w["x"], w["y"]);
    if (lemma == "algebraic_fact") {
        const int n = w["n"];
        const double zeta = w["zeta"], rho = w["rho"];
        const std::vector<double> spec = w["spectrum"].get<std::vector<double>>();
        const double rhs = 2.0 * ((n - 2.0) * (1.0 - zeta)
                                  - 2.0 * zeta * zeta * rho * (n * n - 2.0 * n + 2.0)
                                        / ((n - 2.0) * (n - 2.0)));
        if (w.contains("i")) {
            const double li = spec[w["i"].get<int>()], lj = spec[w["j"].get<int>()];
            return (n - 2.0) * (li + lj)
                 - rho * ((li - 1.0) * (li - 1.0) + (lj - 1.0) * (lj - 1.0)) - rhs;
        }
        Eigen::VectorXd lam(n);
        for (int i = 0; i < n; ++i) lam(i) = spec[i];
        const Eigen::MatrixXd pair = frame_from_json(w["pair"]);
        const SymmetricForm hf(n, Eigen::MatrixXd(lam.asDiagonal()));
        const SymmetricForm h0 = hf.tracefree();
        const Eigen::VectorXd e1 = pair.row(0), e2 = pair.row(1);
        const double lhs = (n - 2.0) / n * hf.trace()
                               * (e1.dot(hf.mat() * e1) + e2.dot(hf.mat() * e2))
                         - rho * (e1.dot(h0.square().mat() * e1)
                                  + e2.dot(h0.square().mat() * e2));
        return lhs - rhs * hf.trace() * hf.trace() / (n * n);
    }
    if (lemma == "appendixA_small") {
        const int n = w["n"];
        const std::uint64_t ts = w["trial_seed"];
        const std::string part = w["part"];
        if (part == "wedge_product") {
            const SymmetricForm h = make_two_positive(n, derive_seed(ts, 1));
            const CurvatureTensor hh = kulkarni_nomizu(h, h);
            return iso_value_at(hh, frame_from_json(w["frame"]), w["lambda"], w["mu"])
                 / w["scale"].get<double>();
        }
        const CurvatureTensor s = make_pic_sample(n, derive_seed(ts, 3));
        const SymmetricForm ric = ricci(s);
        const Eigen::VectorXd ev = ric.eigenvalues();
        const double scale = w["scale"];
        if (part == "ricci_max") return (0.5 * ric.trace() - ev(n - 1)) / scale;
        return (ev(0) + ev(1) + ev(2) + ev(3)) / scale;
    }
    if (lemma == "pic_to_pic1") {
        const int n = w["n"];
        const CurvatureTensor s = make_pic_sample(n, w["trial_seed"]);
        const SymmetricForm g = ricci(s) * (1.0 / (n - 4.0));
        return z_value_at(s, &g, -2.0 / (n - 4.0), frame_from_json(w["frame"]), w["lambda"])
             / w["scale"].get<double>();
    }
    if (lemma == "extension") {
        const int n = w["n"];
        const std::uint64_t ts = w["trial_seed"];
        Rng rng(derive_seed(ts, 0));
        CurvatureTensor s = make_unit_gaussian(n, derive_seed(ts, 1));
        const SymmetricForm h = make_unit_symmetric(n, derive_seed(ts, 2)) * 0.5;
        s.axpy(rng.uniform(-0.05, 0.08), identity_wedge(n));
        const CurvatureTensor ext = extend(s, h);
        const double m1 = iso_value_at(ext, frame_from_json(w["frame5"]),
                                       w["lambda5"], w["mu5"]);
        const double m2 = z_value_at(s, &h, 0.0, frame_from_json(w["frame4"]),
                                     w["lambda4"]);
        if (w["part"] == "restriction") return m2 - m1 + 1e-9;
        return (m1 > 0) == (m2 > 0) ? std::min(std::abs(m1), std::abs(m2))
                                    : -std::min(std::abs(m1), std::abs(m2));
    }
    if (lemma == "interpolation") {
        const int n = w["n"];
        const InterpolationInputs in = interpolation_inputs(n, w["trial_seed"]);
        const double scale = w["scale"];
        return interpolation_margin_at(in.s, in.h0, w["shift"],
                                       frame_from_json(w["frame"]), w["lambda"])
             / (scale * scale);
    }
    if (lemma == "sharp_tangent") {
        const int n = w["n"];
        const std::uint64_t ts = w["trial_seed"];
        CurvatureTensor u = make_nonbianchi(n, derive_seed(ts, 1));
        u.axpy(w["c_shift"].get<double>(), identity_wedge(n));
        const CurvatureTensor p =
            make_psd_gram(n, derive_seed(ts, 4)) * w["p_scale"].get<double>();
        const CurvatureTensor s = u + p;
        return iso_value_at(sharp(s), frame_from_json(w["frame"]), 1.0, 1.0)
             / w["scale"].get<double>();
    }
    if (lemma == "surgery_transform") {
        const int n = w["n"];
        const SurgeryCase sc = surgery_case(n, w["z"], w["pert"], w["pert_seed"]);
        const std::string part = w["part"];
        if (part == "scal") return sc.scal_gain / sc.w;
        if (part == "ratio") return 0.2 - sc.residual.entries().norm() / sc.w;
        return iso_value_at(sc.r_tilde, frame_from_json(w["frame"]), w["lambda"], w["mu"]);
    }
    throw std::invalid_argument("replay_witness: unknown lemma " + lemma);
}

// ---------------------------------------------------------------------------
// Serialization.

nlohmann::json LemmaReport::to_json() const {
    json j;
    j["lemma_id"] = lemma_id;
    j["n_range"] = n_range;
    j["grid_points"] = grid_points;
    j["trials"] = trials;
    j["inconclusive"] = inconclusive;
    j["worst_margin"] = worst_margin;
    j["worst_witness"] = worst_witness;
    j["tol"] = tol;
    j["passed"] = passed;
    if (!note.empty()) j["note"] = note;
    return j;
}

std::string certificates_json(const std::vector<LemmaReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    return arr.dump(2);
}

std::string junit_xml(const std::vector<LemmaReport>& reports) {
    std::ostringstream os;
    int failures = 0;
    for (const auto& r : reports)
        if (!r.passed) ++failures;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<testsuite name=\"curvcone-verify\" tests=\"" << reports.size()
       << "\" failures=\"" << failures << "\">\n";
    for (const auto& r : reports) {
        os << "  <testcase name=\"" << r.lemma_id << "\" time=\""
           << r.runtime_ms / 1000.0 << "\"";
        if (r.passed) {
            os << "/>\n";
        } else {
            os << ">\n    <failure message=\"worst margin " << r.worst_margin
               << "\"/>\n  </testcase>\n";
        }
    }
    os << "</testsuite>\n";
    return os.str();
}

} // namespace curvcone
