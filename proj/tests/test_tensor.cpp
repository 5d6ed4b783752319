#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvcone/cones.hpp"
#include "curvcone/tensor.hpp"

using namespace curvcone;

namespace {

// Independent oracle: Ricci contraction by direct component summation.
SymmetricForm ricci_oracle(const CurvatureTensor& r) {
    const int n = r.n();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i <= n; ++i)
        for (int k = 1; k <= n; ++k) {
            double s = 0.0;
            for (int p = 1; p <= n; ++p) s += r.component(i, p, k, p);
            m(i - 1, k - 1) = s;
        }
    return {n, std::move(m)};
}

// Independent oracle: Frobenius norm over all n^4 signed components.
double frobenius_oracle(const CurvatureTensor& r) {
    const int n = r.n();
    double s = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            for (int k = 1; k <= n; ++k)
                for (int l = 1; l <= n; ++l) {
                    const double v = r.component(i, j, k, l);
                    s += v * v;
                }
    return std::sqrt(s);
}

} // namespace

TEST_CASE("pair indexing") {
    CHECK(pair_index(1, 2, 5) == 0);
    CHECK(pair_index(4, 5, 5) == 9);
    // Enumerate (1,2),(1,3),(1,4),(1,5),(2,3),(2,4): the sixth pair.
    CHECK(pair_index(2, 4, 5) == 5);
    CHECK_THROWS_AS(pair_index(2, 2, 5), std::out_of_range);
    CHECK_THROWS_AS(pair_index(0, 1, 5), std::out_of_range);
    for (int n : {2, 5, 9}) {
        for (int p = 0; p < pair_count(n); ++p) {
            const auto [i, j] = pair_unindex(p, n);
            CHECK(pair_index(i, j, n) == p);
        }
    }
}

TEST_CASE("component sign conventions") {
    const CurvatureTensor r = identity_wedge(4);
    CHECK(r.component(1, 2, 1, 2) == doctest::Approx(2.0));
    CHECK(r.component(1, 2, 2, 1) == doctest::Approx(-2.0));
    CHECK(r.component(2, 1, 1, 2) == doctest::Approx(-2.0));
    CHECK(r.component(1, 1, 2, 3) == 0.0);
    CHECK_THROWS_AS(r.component(0, 1, 2, 3), std::out_of_range);
}

TEST_CASE("kulkarni-nomizu products") {
    const int n = 4;
    const SymmetricForm id = SymmetricForm::identity(n);
    const CurvatureTensor idw = kulkarni_nomizu(id, id);
    for (int p = 0; p < idw.N(); ++p)
        for (int q = 0; q < idw.N(); ++q)
            CHECK(idw.entries()(p, q) == doctest::Approx(p == q ? 2.0 : 0.0));

    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    z(0) = 1.0;
    const CurvatureTensor idz = kulkarni_nomizu(id, SymmetricForm::outer(z));
    CHECK(idz.component(1, 2, 1, 2) == doctest::Approx(1.0));
    CHECK(idz.component(3, 4, 3, 4) == doctest::Approx(0.0));

    Eigen::MatrixXd d = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0).asDiagonal();
    const CurvatureTensor aw = kulkarni_nomizu(SymmetricForm(4, d), id);
    CHECK(aw.component(1, 2, 1, 2) == doctest::Approx(3.0));

    // Symmetry and Bianchi for random factors.
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(derive_seed(99, trial));
        const int m = 4 + static_cast<int>(rng.uniform_index(5));
        Eigen::MatrixXd am(m, m), bm(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                am(i, j) = rng.gaussian(); am(j, i) = am(i, j);
                bm(i, j) = rng.gaussian(); bm(j, i) = bm(i, j);
            }
        const SymmetricForm a(m, am), b(m, bm);
        const CurvatureTensor ab = kulkarni_nomizu(a, b);
        const CurvatureTensor ba = kulkarni_nomizu(b, a);
        CHECK((ab - ba).frobenius() < 1e-12 * (1.0 + ab.frobenius()));
        CHECK(ab.bianchi_defect() < 1e-12 * (1.0 + ab.frobenius()));
    }
}

TEST_CASE("ricci contraction and scalar") {
    const CurvatureTensor sph = sphere_tensor(5, 1.0); // unit-curvature sphere
    const SymmetricForm ric = ricci(sph);
    for (int i = 1; i <= 5; ++i) CHECK(ric(i, i) == doctest::Approx(4.0));
    CHECK(scalar(sph) == doctest::Approx(20.0));

    CHECK(scalar(zero_tensor(5)) == 0.0);
    CHECK(ricci(zero_tensor(5)).frobenius() == 0.0);

    const CurvatureTensor cyl = cylinder_tensor(5, 1.0);
    const SymmetricForm rc = ricci_oracle(cyl);
    for (int i = 1; i <= 4; ++i) CHECK(rc(i, i) == doctest::Approx(3.0));
    CHECK(rc(5, 5) == doctest::Approx(0.0));
    CHECK(scalar(cyl) == doctest::Approx(12.0));
    CHECK((ricci(cyl) - rc).frobenius() < 1e-12);
}

TEST_CASE("ricci of A wedge id identity") {
    for (int n = 4; n <= 12; ++n) {
        for (int trial = 0; trial < 100; ++trial) {
            Rng rng(derive_seed(1000 + n, trial));
            Eigen::MatrixXd am(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    am(i, j) = rng.gaussian();
                    am(j, i) = am(i, j);
                }
            const SymmetricForm a(n, am);
            const SymmetricForm lhs = ricci(kulkarni_nomizu(a, SymmetricForm::identity(n)));
            const Eigen::MatrixXd rhs =
                (n - 2.0) * a.mat() + a.trace() * Eigen::MatrixXd::Identity(n, n);
            CHECK((lhs.mat() - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        }
    }
}

TEST_CASE("ricci decomposition") {
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + trial % 6;
        const CurvatureTensor r = random_gaussian(n, derive_seed(7, trial));
        const RicciDecomposition d = ricci_decomposition(r);
        CHECK((d.reassemble(n) - r).frobenius() < 1e-10 * r.frobenius());
        CHECK(ricci(d.weyl).frobenius() < 1e-10 * r.frobenius());
    }
}

TEST_CASE("ell map and inverse") {
    const int n = 12;
    const CurvatureTensor s = random_gaussian(n, 42);

    // a = b = 0 is the identity.
    CHECK((ell(0.0, 0.0, s) - s).frobenius() < 1e-12 * s.frobenius());

    // Scalar part scales by 1 + 2(n-1)a.
    const double a = 0.01, b = 0.005;
    const CurvatureTensor ls = ell(a, b, s);
    CHECK(scalar(ls) == doctest::Approx((1.0 + 2.0 * (n - 1) * a) * scalar(s)).epsilon(1e-10));
    // Tracefree Ricci scales by 1 + (n-2)b; Weyl is unchanged.
    CHECK((tracefree_ricci(ls).mat() - (1.0 + (n - 2) * b) * tracefree_ricci(s).mat()).norm()
          < 1e-9 * (1.0 + tracefree_ricci(s).frobenius()));
    CHECK((ricci_decomposition(ls).weyl - ricci_decomposition(s).weyl).frobenius()
          < 1e-9 * s.frobenius());

    // Sphere stays a multiple of id^id.
    const CurvatureTensor lsph = ell(0.01, 0.37, sphere_tensor(n, 1.0));
    const RicciDecomposition d = ricci_decomposition(lsph);
    CHECK(d.tracefree_ric.frobenius() < 1e-10);
    CHECK(d.weyl.frobenius() < 1e-10);
    CHECK(scalar(lsph) == doctest::Approx((1.0 + 22.0 * 0.01) * scalar(sphere_tensor(n, 1.0))));

    // Two-sided inverse.
    for (int trial = 0; trial < 10; ++trial) {
        const CurvatureTensor r = random_gaussian(8, derive_seed(5, trial));
        const CurvatureTensor back = ell(a, b, ell_inverse(a, b, r));
        CHECK((back - r).frobenius() < 1e-10 * r.frobenius());
        const CurvatureTensor fwd = ell_inverse(a, b, ell(a, b, r));
        CHECK((fwd - r).frobenius() < 1e-10 * r.frobenius());
    }
    CHECK_THROWS_AS(ell_inverse(-1.0 / (2.0 * (n - 1)), 0.0, s), std::invalid_argument);
}

TEST_CASE("dimension extension") {
    // Flat extension of the sphere: new-direction sectional curvatures vanish.
    const CurvatureTensor t = extend_flat(sphere_tensor(4, 1.0));
    CHECK(t.n() == 5);
    for (int i = 1; i <= 4; ++i) CHECK(t.component(i, 5, i, 5) == 0.0);
    CHECK(t.component(1, 2, 1, 2) == doctest::Approx(1.0));

    // H = id on the zero tensor: the extension carries exactly H.
    const CurvatureTensor u = extend(zero_tensor(4), SymmetricForm::identity(4));
    for (int i = 1; i <= 4; ++i) CHECK(u.component(i, 5, i, 5) == doctest::Approx(1.0));
    Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(4, 5);
    frame(0, 0) = frame(1, 1) = frame(2, 2) = 1.0;
    frame(3, 4) = 1.0; // e_0, the new direction
    CHECK(iso_value(u, FourFrame(frame), 1.0, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("constructors and norms") {
    CHECK(identity_wedge(4).bianchi_defect() == 0.0);
    CHECK(frobenius_oracle(sphere_tensor(4, 1.0)) == doctest::Approx(std::sqrt(24.0)));
    CHECK(sphere_tensor(4, 1.0).frobenius() == doctest::Approx(std::sqrt(24.0)));
    CHECK(identity_wedge(4).frobenius() == doctest::Approx(std::sqrt(96.0)));
    const CurvatureTensor r = random_gaussian(6, 11);
    CHECK(r.frobenius() == doctest::Approx(frobenius_oracle(r)).epsilon(1e-12));

    // inner(,) matches the all-components convention.
    const CurvatureTensor s = random_gaussian(6, 12);
    double ip = 0.0;
    for (int i = 1; i <= 6; ++i)
        for (int j = 1; j <= 6; ++j)
            for (int k = 1; k <= 6; ++k)
                for (int l = 1; l <= 6; ++l)
                    ip += r.component(i, j, k, l) * s.component(i, j, k, l);
    CHECK(r.inner(s) == doctest::Approx(ip).epsilon(1e-12));
}

TEST_CASE("bianchi projection and defect") {
    Rng rng(3);
    const int n = 6;
    const int N = pair_count(n);
    Eigen::MatrixXd e(N, N);
    for (int p = 0; p < N; ++p)
        for (int q = p; q < N; ++q) {
            e(p, q) = rng.gaussian();
            e(q, p) = e(p, q);
        }
    const CurvatureTensor raw(n, e);
    CHECK(raw.bianchi_defect() > 0.1); // raw draws are far from Bianchi
    const CurvatureTensor proj = raw.bianchi_projection();
    CHECK(proj.bianchi_defect() < 1e-13);
    CHECK(random_gaussian(8, 4).bianchi_defect() < 1e-13);

    // Projection is idempotent.
    CHECK((proj.bianchi_projection() - proj).frobenius() < 1e-13);
}

TEST_CASE("json round trip and validation") {
    const CurvatureTensor r = random_gaussian(5, 21);
    const CurvatureTensor back = tensor_from_json(tensor_to_json(r));
    CHECK((back - r).frobenius() < 1e-12 * r.frobenius());

    CHECK_THROWS(tensor_from_json("{\"n\": 4}"));
    // Asymmetric entries are rejected.
    std::string bad = "{\"n\":2,\"convention\":\"lex-pairs-v1\",\"entries\":[[1.0]]}";
    CHECK_NOTHROW(tensor_from_json(bad));
    std::string bad2 =
        "{\"n\":3,\"convention\":\"lex-pairs-v1\","
        "\"entries\":[[1,2,3],[0,1,0],[0,0,1]]}";
    CHECK_THROWS(tensor_from_json(bad2));
}

TEST_CASE("orthonormalization") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(rng.uniform_index(8));
        Eigen::MatrixXd m(4, n);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = rng.gaussian();
        const Eigen::MatrixXd q = orthonormalize_rows(m);
        CHECK((q * q.transpose() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
    // Degenerate input still yields an orthonormal frame.
    Eigen::MatrixXd deg = Eigen::MatrixXd::Zero(4, 6);
    deg.row(0).setOnes();
    deg.row(1).setOnes();
    const Eigen::MatrixXd q = orthonormalize_rows(deg);
    CHECK((q * q.transpose() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("random sampling determinism") {
    const CurvatureTensor a = random_gaussian(6, 777);
    const CurvatureTensor b = random_gaussian(6, 777);
    CHECK((a - b).frobenius() == 0.0);
}
