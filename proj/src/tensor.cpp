#include "curvcone/tensor.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace curvcone {

Eigen::MatrixXd orthonormalize_rows(Eigen::MatrixXd m) {
    const int k = static_cast<int>(m.rows());
    const int n = static_cast<int>(m.cols());
    for (int pass = 0; pass < 2; ++pass) {
        for (int r = 0; r < k; ++r) {
            for (int s = 0; s < r; ++s)
                m.row(r) -= m.row(r).dot(m.row(s)) * m.row(s);
            const double nrm = m.row(r).norm();
            if (nrm < 1e-12) {
                // Degenerate row: fall back to the first coordinate direction
                // not yet spanned (deterministic).
                for (int c = 0; c < n; ++c) {
                    Eigen::RowVectorXd cand = Eigen::RowVectorXd::Zero(n);
                    cand(c) = 1.0;
                    for (int s = 0; s < r; ++s)
                        cand -= cand.dot(m.row(s)) * m.row(s);
                    if (cand.norm() > 0.5) {
                        m.row(r) = cand / cand.norm();
                        break;
                    }
                }
            } else {
                m.row(r) /= nrm;
            }
        }
    }
    return m;
}

double CurvatureTensor::evaluate(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& w, const Eigen::VectorXd& x) const {
    const int N = this->N();
    Eigen::VectorXd wf(N), wg(N);
    int p = 0;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j, ++p) {
            wf(p) = u(i) * v(j) - u(j) * v(i);
            wg(p) = w(i) * x(j) - w(j) * x(i);
        }
    return wf.dot(m_ * wg);
}

double CurvatureTensor::bianchi_defect() const {
    if (bianchi_cache_) return *bianchi_cache_;
    double worst = 0.0;
    for (int i = 1; i <= n_; ++i)
        for (int j = i + 1; j <= n_; ++j)
            for (int k = j + 1; k <= n_; ++k)
                for (int l = k + 1; l <= n_; ++l) {
                    const double s = m_(pair_index(i, j, n_), pair_index(k, l, n_))
                                   - m_(pair_index(i, k, n_), pair_index(j, l, n_))
                                   + m_(pair_index(i, l, n_), pair_index(j, k, n_));
                    worst = std::max(worst, std::abs(s));
                }
    bianchi_cache_ = worst;
    return worst;
}

CurvatureTensor CurvatureTensor::bianchi_projection() const {
    Eigen::MatrixXd e = m_;
    for (int i = 1; i <= n_; ++i)
        for (int j = i + 1; j <= n_; ++j)
            for (int k = j + 1; k <= n_; ++k)
                for (int l = k + 1; l <= n_; ++l) {
                    const int p1 = pair_index(i, j, n_), q1 = pair_index(k, l, n_);
                    const int p2 = pair_index(i, k, n_), q2 = pair_index(j, l, n_);
                    const int p3 = pair_index(i, l, n_), q3 = pair_index(j, k, n_);
                    // Lambda^4 component of the quadruple {i,j,k,l}.
                    const double beta = (e(p1, q1) - e(p2, q2) + e(p3, q3)) / 3.0;
                    e(p1, q1) -= beta; e(q1, p1) = e(p1, q1);
                    e(p2, q2) += beta; e(q2, p2) = e(p2, q2);
                    e(p3, q3) -= beta; e(q3, p3) = e(p3, q3);
                }
    return {n_, std::move(e)};
}

std::vector<double> CurvatureTensor::dense_components() const {
    const int n = n_;
    std::vector<double> r4(static_cast<std::size_t>(n) * n * n * n, 0.0);
    const auto at = [n](int i, int j, int k, int l) {
        return ((static_cast<std::size_t>(i) * n + j) * n + k) * n + l;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const int p = pair_index(i + 1, j + 1, n);
            for (int k = 0; k < n; ++k)
                for (int l = k + 1; l < n; ++l) {
                    const double v = m_(p, pair_index(k + 1, l + 1, n));
                    if (v == 0.0) continue;
                    r4[at(i, j, k, l)] = v;
                    r4[at(j, i, k, l)] = -v;
                    r4[at(i, j, l, k)] = -v;
                    r4[at(j, i, l, k)] = v;
                }
        }
    return r4;
}

CurvatureTensor zero_tensor(int n) { return CurvatureTensor(n); }

CurvatureTensor identity_wedge(int n) {
    const SymmetricForm id = SymmetricForm::identity(n);
    return kulkarni_nomizu(id, id);
}

CurvatureTensor sphere_tensor(int n, double kappa) {
    return identity_wedge(n) * (0.5 * kappa);
}

CurvatureTensor cylinder_tensor(int n, double k) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    p(n - 1, n - 1) = 0.0;
    const SymmetricForm proj(n, p);
    return kulkarni_nomizu(proj, proj) * (0.5 * k);
}

CurvatureTensor kulkarni_nomizu(const SymmetricForm& a, const SymmetricForm& b) {
    const int n = a.n();
    if (b.n() != n) throw std::invalid_argument("kulkarni_nomizu: dimension mismatch");
    const Eigen::MatrixXd& A = a.mat();
    const Eigen::MatrixXd& B = b.mat();
    CurvatureTensor out(n);
    Eigen::MatrixXd& e = out.entries_mut();
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p) {
            int q = 0;
            for (int k = 0; k < n; ++k)
                for (int l = k + 1; l < n; ++l, ++q)
                    e(p, q) = A(i, k) * B(j, l) - A(i, l) * B(j, k)
                            - A(j, k) * B(i, l) + A(j, l) * B(i, k);
        }
    return out;
}

SymmetricForm ricci(const CurvatureTensor& r) {
    const int n = r.n();
    Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i <= n; ++i)
        for (int k = i; k <= n; ++k) {
            double s = 0.0;
            for (int p = 1; p <= n; ++p) s += r.component(i, p, k, p);
            ric(i - 1, k - 1) = s;
            ric(k - 1, i - 1) = s;
        }
    return {n, std::move(ric)};
}

double scalar(const CurvatureTensor& r) {
    // trace(Ric) = 2 * sum of diagonal pair entries.
    return 2.0 * r.entries().trace();
}

SymmetricForm tracefree_ricci(const CurvatureTensor& r) {
    return ricci(r).tracefree();
}

CurvatureTensor RicciDecomposition::reassemble(int n) const {
    CurvatureTensor out = identity_wedge(n) * (scalar_part / (2.0 * n * (n - 1)));
    out.axpy(1.0 / (n - 2), kulkarni_nomizu(tracefree_ric, SymmetricForm::identity(n)));
    out.axpy(1.0, weyl);
    return out;
}

RicciDecomposition ricci_decomposition(const CurvatureTensor& r) {
    const int n = r.n();
    if (n < 3) throw std::invalid_argument("ricci_decomposition: need n >= 3");
    RicciDecomposition d;
    d.scalar_part = scalar(r);
    d.tracefree_ric = tracefree_ricci(r);
    CurvatureTensor w = r;
    w.axpy(-d.scalar_part / (2.0 * n * (n - 1)), identity_wedge(n));
    w.axpy(-1.0 / (n - 2), kulkarni_nomizu(d.tracefree_ric, SymmetricForm::identity(n)));
    d.weyl = std::move(w);
    return d;
}

CurvatureTensor ell(double a, double b, const CurvatureTensor& s) {
    const int n = s.n();
    const SymmetricForm ric = ricci(s);
    const double sc = ric.trace();
    CurvatureTensor out = s;
    out.axpy(b, kulkarni_nomizu(ric, SymmetricForm::identity(n)));
    out.axpy((a - b) * sc / n, identity_wedge(n));
    return out;
}

CurvatureTensor ell_inverse(double a, double b, const CurvatureTensor& r) {
    const int n = r.n();
    const double fs = 1.0 + 2.0 * (n - 1) * a;
    const double ft = 1.0 + (n - 2) * b;
    if (std::abs(fs) < 1e-14 || std::abs(ft) < 1e-14)
        throw std::invalid_argument("ell_inverse: singular scale factor");
    RicciDecomposition d = ricci_decomposition(r);
    d.scalar_part /= fs;
    d.tracefree_ric = d.tracefree_ric * (1.0 / ft);
    return d.reassemble(n);
}

CurvatureTensor extend(const CurvatureTensor& r, const SymmetricForm& h) {
    const int n = r.n();
    if (h.n() != n) throw std::invalid_argument("extend: dimension mismatch");
    const int m = n + 1;
    CurvatureTensor out(m);
    Eigen::MatrixXd& e = out.entries_mut();
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            const int p = pair_index(i, j, m);
            const int p_old = pair_index(i, j, n);
            for (int k = 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l)
                    e(p, pair_index(k, l, m)) = r.entries()(p_old, pair_index(k, l, n));
        }
    for (int i = 1; i <= n; ++i)
        for (int k = 1; k <= n; ++k)
            e(pair_index(i, m, m), pair_index(k, m, m)) = h(i, k);
    e = 0.5 * (e + e.transpose()).eval();
    return out;
}

CurvatureTensor random_gaussian(int n, std::uint64_t seed) {
    Rng rng(seed);
    const int N = pair_count(n);
    Eigen::MatrixXd e(N, N);
    for (int p = 0; p < N; ++p)
        for (int q = p; q < N; ++q) {
            e(p, q) = rng.gaussian();
            e(q, p) = e(p, q);
        }
    return CurvatureTensor(n, std::move(e)).bianchi_projection();
}

// ---------------------------------------------------------------------------
// JSON / CSV

std::string tensor_to_json(const CurvatureTensor& r) {
    nlohmann::json j;
    j["n"] = r.n();
    j["convention"] = "lex-pairs-v1";
    auto rows = nlohmann::json::array();
    for (int p = 0; p < r.N(); ++p) {
        auto row = nlohmann::json::array();
        for (int q = 0; q < r.N(); ++q) row.push_back(r.entries()(p, q));
        rows.push_back(std::move(row));
    }
    j["entries"] = std::move(rows);
    return j.dump(2);
}

CurvatureTensor tensor_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("n") || !j.contains("entries"))
        throw std::invalid_argument("tensor json: missing fields");
    if (j.value("convention", "lex-pairs-v1") != "lex-pairs-v1")
        throw std::invalid_argument("tensor json: unknown convention");
    const int n = j["n"].get<int>();
    if (n < 2) throw std::invalid_argument("tensor json: need n >= 2");
    const int N = pair_count(n);
    const auto& rows = j["entries"];
    if (static_cast<int>(rows.size()) != N)
        throw std::invalid_argument("tensor json: wrong row count");
    Eigen::MatrixXd e(N, N);
    for (int p = 0; p < N; ++p) {
        if (static_cast<int>(rows[p].size()) != N)
            throw std::invalid_argument("tensor json: wrong column count");
        for (int q = 0; q < N; ++q) e(p, q) = rows[p][q].get<double>();
    }
    const double asym = (e - e.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
    if (asym > 1e-9 * scale)
        throw std::invalid_argument("tensor json: entries not symmetric");
    return {n, std::move(e)};
}

void save_tensor(const CurvatureTensor& r, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_tensor: cannot open " + path);
    f << tensor_to_json(r) << '\n';
}

CurvatureTensor load_tensor(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_tensor: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return tensor_from_json(ss.str());
}

std::string eigenvalues_csv(const SymmetricForm& f) {
    const Eigen::VectorXd ev = f.eigenvalues();
    std::ostringstream os;
    os << "index,eigenvalue\n";
    char buf[64];
    for (int i = 0; i < ev.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", ev(i));
        os << i << ',' << buf << '\n';
    }
    return os.str();
}

} // namespace curvcone
