#include "curvcone/quadratic.hpp"

#include <cmath>

namespace curvcone {

CurvatureTensor square(const CurvatureTensor& r) {
    // Sum over ordered (p,q) doubles the pair-basis product.
    return {r.n(), 2.0 * (r.entries() * r.entries())};
}

CurvatureTensor sharp(const CurvatureTensor& r) {
    const int n = r.n();
    const std::vector<double> r4 = r.dense_components();
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    CurvatureTensor out(n);
    Eigen::MatrixXd& e = out.entries_mut();
    const double* base = r4.data();
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p) {
            int q = 0;
            for (int k = 0; k < n; ++k)
                for (int l = k + 1; l < n; ++l, ++q) {
                    if (q < p) continue;
                    double s = 0.0;
                    for (int pp = 0; pp < n; ++pp) {
                        const double* rik = base + (static_cast<std::size_t>(i) * n + pp) * n2
                                          + static_cast<std::size_t>(k) * n;
                        const double* ril = base + (static_cast<std::size_t>(i) * n + pp) * n2
                                          + static_cast<std::size_t>(l) * n;
                        const double* rjk = base + (static_cast<std::size_t>(j) * n + pp) * n2
                                          + static_cast<std::size_t>(k) * n;
                        const double* rjl = base + (static_cast<std::size_t>(j) * n + pp) * n2
                                          + static_cast<std::size_t>(l) * n;
                        for (int qq = 0; qq < n; ++qq)
                            s += rik[qq] * rjl[qq] - ril[qq] * rjk[qq];
                    }
                    e(p, q) = 2.0 * s;
                    e(q, p) = e(p, q);
                }
        }
    return out;
}

CurvatureTensor hamilton_q(const CurvatureTensor& r) {
    CurvatureTensor q = square(r);
    q.axpy(1.0, sharp(r));
    return q;
}

SymmetricForm star(const CurvatureTensor& s, const SymmetricForm& h) {
    const int n = s.n();
    if (h.n() != n) throw std::invalid_argument("star: dimension mismatch");
    const std::vector<double> r4 = s.dense_components();
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    const Eigen::MatrixXd& hm = h.mat();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = i; k < n; ++k) {
            double acc = 0.0;
            for (int p = 0; p < n; ++p) {
                const double* row = r4.data() + (static_cast<std::size_t>(i) * n + p) * n2
                                  + static_cast<std::size_t>(k) * n;
                for (int q = 0; q < n; ++q) acc += row[q] * hm(p, q);
            }
            out(i, k) = acc;
            out(k, i) = acc;
        }
    return {n, std::move(out)};
}

CurvatureTensor d_ab(const CurvatureTensor& s, double a, double b) {
    const int n = s.n();
    const double denom = n * (1.0 + 2.0 * (n - 1) * a);
    if (std::abs(denom) < 1e-14)
        throw std::invalid_argument("d_ab: singular denominator");
    const SymmetricForm ric = ricci(s);
    const SymmetricForm ric0 = ric.tracefree();
    const SymmetricForm id = SymmetricForm::identity(n);
    const double ric0_sq_norm = ric0.frobenius() * ric0.frobenius();

    CurvatureTensor out = kulkarni_nomizu(ric0, ric0)
                        * (2.0 * b + (n - 2) * b * b - 2.0 * a);
    out.axpy(2.0 * a, kulkarni_nomizu(ric, ric));
    out.axpy(2.0 * b * b, kulkarni_nomizu(ric0.square(), id));
    const double c = (n * b * b * (1.0 - 2.0 * b)
                      - 2.0 * (a - b) * (1.0 - 2.0 * b + n * b * b)) / denom;
    out.axpy(c * ric0_sq_norm, kulkarni_nomizu(id, id));
    return out;
}

SymmetricForm ricci_d_ab(const CurvatureTensor& s, double a, double b) {
    const int n = s.n();
    const double denom = n * (1.0 + 2.0 * (n - 1) * a);
    if (std::abs(denom) < 1e-14)
        throw std::invalid_argument("ricci_d_ab: singular denominator");
    const SymmetricForm ric = ricci(s);
    const double sc = ric.trace();
    const SymmetricForm ric0 = ric.tracefree();
    const double ric0_sq_norm = ric0.frobenius() * ric0.frobenius();

    Eigen::MatrixXd out = -4.0 * b * (ric.mat() * ric.mat());
    out += (4.0 / n) * (2.0 * b + (n - 2) * a) * sc * ric.mat();
    const double c = 2.0 * (n * n * b * b - 2.0 * (n - 1) * (a - b) * (1.0 - 2.0 * b)) / denom;
    out += (c * ric0_sq_norm) * Eigen::MatrixXd::Identity(n, n);
    out += (4.0 / (n * n)) * (a - b) * sc * sc * Eigen::MatrixXd::Identity(n, n);
    return {n, std::move(out)};
}

OdeRhsKind OdeRhsKind::q_plus_dab(double a, double b) {
    OdeRhsKind k;
    k.tag = Tag::QPlusDab;
    k.a = a;
    k.b = b;
    return k;
}

OdeRhsKind OdeRhsKind::t_witness(double a, double b, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("t_witness: epsilon must be >= 0");
    OdeRhsKind k;
    k.tag = Tag::TWitness;
    k.a = a;
    k.b = b;
    k.epsilon = epsilon;
    return k;
}

OdeRhsValue ode_rhs(const OdeRhsKind& kind, const CurvatureTensor& s,
                    const CurvatureTensor* t_witness) {
    OdeRhsValue v;
    switch (kind.tag) {
        case OdeRhsKind::Tag::PlainQ:
            v.ds = hamilton_q(s);
            break;
        case OdeRhsKind::Tag::QPlusDab:
            v.ds = hamilton_q(s);
            v.ds.axpy(1.0, d_ab(s, kind.a, kind.b));
            break;
        case OdeRhsKind::Tag::TWitness: {
            if (!t_witness)
                throw std::invalid_argument("ode_rhs: TWitness requires a witness tensor");
            v.ds = hamilton_q(s);
            v.ds.axpy(1.0, d_ab(s, kind.a, kind.b));
            CurvatureTensor dt = square(s);
            const double sc = scalar(s);
            dt.axpy(kind.epsilon * sc * sc, identity_wedge(s.n()));
            v.dt = std::move(dt);
            break;
        }
    }
    return v;
}

} // namespace curvcone
