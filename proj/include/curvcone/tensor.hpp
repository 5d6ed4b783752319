// Algebraic curvature tensors on a single tangent space.
//
// A tensor R in dimension n is stored as a symmetric N x N matrix on the
// space of 2-forms, N = n(n-1)/2, with rows/columns indexed by pairs (i,j),
// i < j, in lexicographic order, and entry[(i,j)][(k,l)] = R_{ijkl}.
// Component access extends the storage to arbitrary index order via the
// antisymmetry in each pair; the first Bianchi identity is tracked as a
// flag (witness tensors in the cone machinery deliberately drop it).
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvcone/rng.hpp"

namespace curvcone {

// ---------------------------------------------------------------------------
// Pair indexing: bijection {(i,j) : 1 <= i < j <= n} <-> {0, ..., N-1}.

inline int pair_count(int n) { return n * (n - 1) / 2; }

inline int pair_index(int i, int j, int n) {
    if (i < 1 || j < 1 || i >= j || j > n)
        throw std::out_of_range("pair_index: need 1 <= i < j <= n");
    return (i - 1) * n - i * (i + 1) / 2 + j - 1;
}

// Inverse of pair_index.
inline std::pair<int, int> pair_unindex(int p, int n) {
    if (p < 0 || p >= pair_count(n))
        throw std::out_of_range("pair_unindex: index out of range");
    int i = 1;
    while (p >= n - i) {
        p -= n - i;
        ++i;
    }
    return {i, i + 1 + p};
}

// ---------------------------------------------------------------------------
// SymmetricForm: dense symmetric n x n bilinear form.

class SymmetricForm {
public:
    SymmetricForm() : n_(0) {}
    explicit SymmetricForm(int n) : n_(n), m_(Eigen::MatrixXd::Zero(n, n)) {}
    SymmetricForm(int n, Eigen::MatrixXd m) : n_(n), m_(std::move(m)) {
        if (m_.rows() != n_ || m_.cols() != n_)
            throw std::invalid_argument("SymmetricForm: shape mismatch");
        m_ = 0.5 * (m_ + m_.transpose()).eval();
    }

    static SymmetricForm identity(int n) {
        return SymmetricForm(n, Eigen::MatrixXd::Identity(n, n));
    }
    static SymmetricForm outer(const Eigen::VectorXd& z) {
        return SymmetricForm(static_cast<int>(z.size()), z * z.transpose());
    }

    int n() const { return n_; }
    const Eigen::MatrixXd& mat() const { return m_; }
    double operator()(int i, int k) const { return m_(i - 1, k - 1); }

    double trace() const { return m_.trace(); }
    double frobenius() const { return m_.norm(); }

    SymmetricForm tracefree() const {
        return SymmetricForm(n_, m_ - (trace() / n_) * Eigen::MatrixXd::Identity(n_, n_));
    }
    SymmetricForm square() const { return SymmetricForm(n_, m_ * m_); }

    // Eigenvalues in nondecreasing order.
    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    // Sum of the two smallest eigenvalues.
    double two_smallest_sum() const {
        const Eigen::VectorXd ev = eigenvalues();
        return ev(0) + ev(1);
    }

    SymmetricForm operator+(const SymmetricForm& o) const { return {n_, m_ + o.m_}; }
    SymmetricForm operator-(const SymmetricForm& o) const { return {n_, m_ - o.m_}; }
    SymmetricForm operator*(double c) const { return {n_, c * m_}; }

private:
    int n_;
    Eigen::MatrixXd m_;
};

// ---------------------------------------------------------------------------
// FourFrame: ordered orthonormal 4-tuple of vectors in R^n (rows).

class FourFrame {
public:
    static constexpr double kOrthoTol = 1e-10;

    FourFrame() = default;
    explicit FourFrame(Eigen::MatrixXd rows, bool validate = true)
        : v_(std::move(rows)) {
        if (v_.rows() != 4) throw std::invalid_argument("FourFrame: need 4 rows");
        if (validate && orthonormality_defect() > kOrthoTol)
            throw std::invalid_argument("FourFrame: rows not orthonormal");
    }

    int n() const { return static_cast<int>(v_.cols()); }
    const Eigen::MatrixXd& rows() const { return v_; }
    Eigen::VectorXd e(int a) const { return v_.row(a - 1); }

    double orthonormality_defect() const {
        return (v_ * v_.transpose() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
    }

    // Standard frame (e_1, e_2, e_3, e_4).
    static FourFrame standard(int n) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, n);
        for (int a = 0; a < 4; ++a) m(a, a) = 1.0;
        return FourFrame(std::move(m), false);
    }

private:
    Eigen::MatrixXd v_;
};

// Modified Gram-Schmidt with a second pass; degenerate rows are replaced by
// deterministic fallback directions.
Eigen::MatrixXd orthonormalize_rows(Eigen::MatrixXd m);

// ---------------------------------------------------------------------------
// CurvatureTensor

class CurvatureTensor {
public:
    CurvatureTensor() : n_(0) {}
    explicit CurvatureTensor(int n)
        : n_(n), m_(Eigen::MatrixXd::Zero(pair_count(n), pair_count(n))) {
        check_dim();
    }
    CurvatureTensor(int n, Eigen::MatrixXd entries) : n_(n), m_(std::move(entries)) {
        check_dim();
        if (m_.rows() != N() || m_.cols() != N())
            throw std::invalid_argument("CurvatureTensor: entries must be N x N");
        m_ = 0.5 * (m_ + m_.transpose()).eval();
    }

    int n() const { return n_; }
    int N() const { return pair_count(n_); }
    const Eigen::MatrixXd& entries() const { return m_; }
    Eigen::MatrixXd& entries_mut() { bianchi_cache_.reset(); return m_; }

    // R_{ijkl} with the sign conventions; 0 for a repeated index in a pair.
    double component(int i, int j, int k, int l) const {
        if (i < 1 || j < 1 || k < 1 || l < 1 || i > n_ || j > n_ || k > n_ || l > n_)
            throw std::out_of_range("component: index out of range");
        if (i == j || k == l) return 0.0;
        double sign = 1.0;
        if (i > j) { std::swap(i, j); sign = -sign; }
        if (k > l) { std::swap(k, l); sign = -sign; }
        return sign * m_(pair_index(i, j, n_), pair_index(k, l, n_));
    }

    // Evaluation on decomposable 2-forms: R(u,v,w,x) summed over all index
    // orderings, equal to (u ^ v)^T E (w ^ x).
    double evaluate(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& w, const Eigen::VectorXd& x) const;

    // Frobenius norm over all n^4 signed components (= 2 * ||entries||_F).
    double frobenius() const { return 2.0 * m_.norm(); }
    // Inner product over all n^4 signed components.
    double inner(const CurvatureTensor& o) const {
        return 4.0 * (m_.array() * o.m_.array()).sum();
    }

    // max over index quadruples of |R_{ijkl} + R_{iklj} + R_{iljk}|.
    double bianchi_defect() const;
    bool bianchi_ok(double tol = 1e-9) const { return bianchi_defect() <= tol; }

    // Removes the totally antisymmetric (Lambda^4) part; the result satisfies
    // the first Bianchi identity exactly.
    CurvatureTensor bianchi_projection() const;

    CurvatureTensor operator+(const CurvatureTensor& o) const { return {n_, m_ + o.m_}; }
    CurvatureTensor operator-(const CurvatureTensor& o) const { return {n_, m_ - o.m_}; }
    CurvatureTensor operator*(double c) const { return {n_, c * m_}; }
    CurvatureTensor& axpy(double c, const CurvatureTensor& o) {
        m_ += c * o.m_;
        bianchi_cache_.reset();
        return *this;
    }

    // Dense n^4 component array R4[((i*n+j)*n+k)*n+l] = R_{i+1,j+1,k+1,l+1}
    // (0-based layout), used by the quadratic contractions.
    std::vector<double> dense_components() const;

private:
    void check_dim() const {
        if (n_ < 2) throw std::invalid_argument("CurvatureTensor: need n >= 2");
    }

    int n_;
    Eigen::MatrixXd m_;
    mutable std::optional<double> bianchi_cache_;
};

// ---------------------------------------------------------------------------
// Constructors and basic maps.

CurvatureTensor zero_tensor(int n);
CurvatureTensor identity_wedge(int n);                  // id ^ id
CurvatureTensor sphere_tensor(int n, double kappa);     // (kappa/2) id ^ id
CurvatureTensor cylinder_tensor(int n, double k);       // (k/2)(id - z z)^ (id - z z), z = e_n
CurvatureTensor kulkarni_nomizu(const SymmetricForm& a, const SymmetricForm& b);

SymmetricForm ricci(const CurvatureTensor& r);
double scalar(const CurvatureTensor& r);
SymmetricForm tracefree_ricci(const CurvatureTensor& r);

struct RicciDecomposition {
    double scalar_part = 0.0;     // scal(R)
    SymmetricForm tracefree_ric;  // Ric°(R)
    CurvatureTensor weyl;         // remainder; ricci(weyl) = 0

    CurvatureTensor reassemble(int n) const;
};

RicciDecomposition ricci_decomposition(const CurvatureTensor& r);

// Bohm-Wilking change of variables and its inverse.
CurvatureTensor ell(double a, double b, const CurvatureTensor& s);
CurvatureTensor ell_inverse(double a, double b, const CurvatureTensor& r);

// (n+1)-dimensional extension: T = S on the old block, T_{i0k0} = H_{ik},
// mixed components zero; the new direction is indexed last.
CurvatureTensor extend(const CurvatureTensor& r, const SymmetricForm& h);
inline CurvatureTensor extend_flat(const CurvatureTensor& r) {
    return extend(r, SymmetricForm(r.n()));
}

// Random Bianchi tensor with unit-scale Gaussian entries.
CurvatureTensor random_gaussian(int n, std::uint64_t seed);

enum class ConeKind { Pic, Pic1, Pic2 };

struct ConeSampleOptions {
    double target_margin = 0.1;   // relative to the Frobenius norm of the draw
    int max_attempts = 64;
    int restarts = 12;            // optimizer budget per margin evaluation
};

// Gaussian draw, Bianchi projection, then a shift by c * id^id chosen so the
// requested cone margin is met (id^id is interior to all three cones).
CurvatureTensor random_in_cone(int n, ConeKind mode, std::uint64_t seed,
                               const ConeSampleOptions& opt = {});

// ---------------------------------------------------------------------------
// JSON serialization ("lex-pairs-v1").

std::string tensor_to_json(const CurvatureTensor& r);
CurvatureTensor tensor_from_json(const std::string& text);
void save_tensor(const CurvatureTensor& r, const std::string& path);
CurvatureTensor load_tensor(const std::string& path);

// CSV export of eigenvalues (one row "index,eigenvalue" per line).
std::string eigenvalues_csv(const SymmetricForm& f);

} // namespace curvcone
