#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvcone/families.hpp"
#include "curvcone/quadratic.hpp"

using namespace curvcone;

namespace {

// Brute-force oracles straight from the index formulas, via the component
// accessor. Independent of the dense-array fast paths.
CurvatureTensor square_oracle(const CurvatureTensor& r) {
    const int n = r.n();
    CurvatureTensor out(n);
    Eigen::MatrixXd& e = out.entries_mut();
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            for (int k = 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    double s = 0.0;
                    for (int p = 1; p <= n; ++p)
                        for (int q = 1; q <= n; ++q)
                            s += r.component(i, j, p, q) * r.component(k, l, p, q);
                    e(pair_index(i, j, n), pair_index(k, l, n)) = s;
                }
    return out;
}

CurvatureTensor sharp_oracle(const CurvatureTensor& r) {
    const int n = r.n();
    CurvatureTensor out(n);
    Eigen::MatrixXd& e = out.entries_mut();
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            for (int k = 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l) {
                    double s = 0.0;
                    for (int p = 1; p <= n; ++p)
                        for (int q = 1; q <= n; ++q)
                            s += r.component(i, p, k, q) * r.component(j, p, l, q)
                               - r.component(i, p, l, q) * r.component(j, p, k, q);
                    e(pair_index(i, j, n), pair_index(k, l, n)) = 2.0 * s;
                }
    return out;
}

double proportionality_defect(const CurvatureTensor& r, const CurvatureTensor& base) {
    const double c = r.inner(base) / base.inner(base);
    CurvatureTensor diff = r;
    diff.axpy(-c, base);
    return diff.frobenius();
}

} // namespace

TEST_CASE("square against the index-formula oracle") {
    CHECK(square(zero_tensor(5)).frobenius() == 0.0);

    // (id^id)^2 entry (1,2,1,2): sum over ordered (p,q) of components squared.
    const CurvatureTensor idw = identity_wedge(5);
    CHECK(square(idw).component(1, 2, 1, 2) == doctest::Approx(8.0));

    const CurvatureTensor r = random_gaussian(5, 101);
    CHECK((square(r) - square_oracle(r)).frobenius() < 1e-11 * square(r).frobenius());

    // O(n)-invariance: the square of a sphere tensor is a multiple of id^id.
    const CurvatureTensor sq = square(sphere_tensor(7, 1.3));
    CHECK(proportionality_defect(sq, identity_wedge(7)) < 1e-10 * sq.frobenius());
}

TEST_CASE("sharp against the index-formula oracle") {
    CHECK(sharp(zero_tensor(5)).frobenius() == 0.0);

    const CurvatureTensor idw = identity_wedge(5);
    const CurvatureTensor sh = sharp(idw);
    CHECK((sh - sharp_oracle(idw)).frobenius() < 1e-11 * (1.0 + sh.frobenius()));
    CHECK(proportionality_defect(sh, idw) < 1e-12 * sh.frobenius());

    const CurvatureTensor r = random_gaussian(5, 102);
    CHECK((sharp(r) - sharp_oracle(r)).frobenius() < 1e-11 * sharp(r).frobenius());

    // Q of a Bianchi tensor keeps the Bianchi identity.
    for (int trial = 0; trial < 30; ++trial) {
        const CurvatureTensor s = random_gaussian(6, derive_seed(55, trial));
        REQUIRE(s.bianchi_defect() < 1e-12);
        CHECK(hamilton_q(s).bianchi_defect() < 1e-9 * (1.0 + hamilton_q(s).frobenius()));
    }
}

TEST_CASE("sphere and cylinder family reductions") {
    // d kappa / dt = 2 (n-1) kappa^2 on the sphere family.
    for (int n : {5, 12}) {
        const double kappa = 0.7;
        const CurvatureTensor q = hamilton_q(sphere_tensor(n, kappa));
        const CurvatureTensor expected = sphere_tensor(n, 1.0); // direction id^id / 2
        CHECK(proportionality_defect(q, expected) < 1e-10 * q.frobenius());
        const double dkappa = q.inner(expected) / expected.inner(expected);
        CHECK(dkappa == doctest::Approx(2.0 * (n - 1) * kappa * kappa).epsilon(1e-12));
    }
    // d k / dt = 2 (n-2) k^2 on the cylinder family.
    for (int n : {5, 12}) {
        const double k = 0.9;
        const CurvatureTensor q = hamilton_q(cylinder_tensor(n, k));
        const CurvatureTensor dir = cylinder_tensor(n, 1.0);
        CHECK(proportionality_defect(q, dir) < 1e-10 * q.frobenius());
        const double dk = q.inner(dir) / dir.inner(dir);
        CHECK(dk == doctest::Approx(2.0 * (n - 2) * k * k).epsilon(1e-12));
    }
}

TEST_CASE("star contraction") {
    const CurvatureTensor r = random_gaussian(6, 103);
    // S * id = Ric(S).
    CHECK((star(r, SymmetricForm::identity(6)).mat() - ricci(r).mat()).norm() < 1e-12);
    // id^id * H = 2 (tr(H) id - H).
    Rng rng(104);
    Eigen::MatrixXd hm(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) {
            hm(i, j) = rng.gaussian();
            hm(j, i) = hm(i, j);
        }
    const SymmetricForm h(6, hm);
    const Eigen::MatrixXd expected =
        2.0 * (h.trace() * Eigen::MatrixXd::Identity(6, 6) - h.mat());
    CHECK((star(identity_wedge(6), h).mat() - expected).norm() < 1e-11);
    CHECK(star(zero_tensor(6), h).frobenius() == 0.0);
}

TEST_CASE("d_ab and the master identity") {
    const int n = 12;
    CHECK(d_ab(random_gaussian(n, 1), 0.0, 0.0).frobenius() < 1e-14);

    // l^{-1}(Q(l(S))) - Q(S) = D_{a,b}(S) on the family-C parameter curve.
    for (int pair = 1; pair <= 4; ++pair) {
        const double b = b_max_for(n) * pair / 4.0;
        const FamilyParams p = family_params(n, b, ConeFamily::C);
        for (int trial = 0; trial < 5; ++trial) {
            const CurvatureTensor s = random_gaussian(n, derive_seed(200 + pair, trial));
            const CurvatureTensor lhs =
                ell_inverse(p.a, p.b, hamilton_q(ell(p.a, p.b, s))) - hamilton_q(s);
            const CurvatureTensor rhs = d_ab(s, p.a, p.b);
            const double scale = std::max(hamilton_q(s).frobenius(), rhs.frobenius());
            CHECK((lhs - rhs).frobenius() < 1e-9 * scale);

            // Closed-form Ricci of the correction term.
            const SymmetricForm rd = ricci(rhs);
            const SymmetricForm rd_formula = ricci_d_ab(s, p.a, p.b);
            CHECK((rd.mat() - rd_formula.mat()).norm() < 1e-9 * (1.0 + rd.frobenius()));
        }
    }
}

TEST_CASE("trace identity and positivity") {
    for (int trial = 0; trial < 20; ++trial) {
        const CurvatureTensor r = random_gaussian(7, derive_seed(300, trial));
        const double ric_sq = ricci(r).frobenius() * ricci(r).frobenius();
        CHECK(scalar(hamilton_q(r)) == doctest::Approx(2.0 * ric_sq).epsilon(1e-9));

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(square(r).entries(),
                                                          Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues()(0) > -1e-10 * square(r).frobenius());
    }
}

TEST_CASE("ode rhs dispatch") {
    const int n = 6;
    CHECK(ode_rhs(OdeRhsKind::plain_q(), zero_tensor(n)).ds.frobenius() == 0.0);

    // TWitness with epsilon = 0: dT = S^2 is PSD.
    const CurvatureTensor s = random_gaussian(n, 31);
    const CurvatureTensor t0 = identity_wedge(n);
    const OdeRhsValue v = ode_rhs(OdeRhsKind::t_witness(0.01, 0.005, 0.0), s, &t0);
    REQUIRE(v.dt.has_value());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v.dt->entries(),
                                                      Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) > -1e-12 * v.dt->frobenius());

    CHECK_THROWS_AS(ode_rhs(OdeRhsKind::t_witness(0.01, 0.005, 0.0), s, nullptr),
                    std::invalid_argument);
    CHECK_THROWS_AS(OdeRhsKind::t_witness(0.0, 0.0, -1.0), std::invalid_argument);

    // Q + D_{a,b} keeps the sphere direction.
    const int m = 12;
    const FamilyParams p = family_params(m, b_max_for(m), ConeFamily::C);
    const OdeRhsValue sv =
        ode_rhs(OdeRhsKind::q_plus_dab(p.a, p.b), sphere_tensor(m, 1.0));
    const CurvatureTensor dir = identity_wedge(m);
    const double c = sv.ds.inner(dir) / dir.inner(dir);
    CurvatureTensor diff = sv.ds;
    diff.axpy(-c, dir);
    CHECK(diff.frobenius() < 1e-10 * sv.ds.frobenius());
}
