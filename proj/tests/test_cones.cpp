#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvcone/cones.hpp"
#include "curvcone/quadratic.hpp"

using namespace curvcone;

namespace {

// Conjugation by a rotation, entry by entry through the evaluation form.
CurvatureTensor rotate_tensor(const CurvatureTensor& r, const Eigen::MatrixXd& q) {
    const int n = r.n();
    CurvatureTensor out(n);
    Eigen::MatrixXd& e = out.entries_mut();
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            for (int k = 1; k <= n; ++k)
                for (int l = k + 1; l <= n; ++l)
                    e(pair_index(i, j, n), pair_index(k, l, n)) =
                        r.evaluate(q.row(i - 1), q.row(j - 1), q.row(k - 1), q.row(l - 1));
    return out;
}

Eigen::MatrixXd random_rotation(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
    return orthonormalize_rows(std::move(g));
}

FourFrame cylinder_frame_e3z(int n) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(4, n);
    f(0, 0) = 1.0;
    f(1, 1) = 1.0;
    f(2, n - 1) = 1.0; // e_3 = z
    f(3, 2) = 1.0;
    return FourFrame(std::move(f));
}

} // namespace

TEST_CASE("iso_value basics") {
    const CurvatureTensor idw = identity_wedge(6);
    const FourFrame std6 = FourFrame::standard(6);
    CHECK(iso_value(idw, std6, 1.0, 1.0) == doctest::Approx(8.0));
    // Any frame gives 8 by O(n)-invariance.
    Eigen::MatrixXd f(4, 6);
    Rng rng(9);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) f(i, j) = rng.gaussian();
    CHECK(iso_value(idw, FourFrame(orthonormalize_rows(f)), 1.0, 1.0)
          == doctest::Approx(8.0));

    const CurvatureTensor cyl = cylinder_tensor(5, 1.0);
    CHECK(iso_value(cyl, cylinder_frame_e3z(5), 1.0, 1.0) == doctest::Approx(2.0));
    CHECK(iso_value(cyl, cylinder_frame_e3z(5), 0.0, 0.0) == doctest::Approx(0.0));

    CHECK_THROWS_AS(iso_value(idw, std6, 1.5, 1.0), std::invalid_argument);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(4, 6);
    bad(0, 0) = bad(1, 0) = 1.0;
    CHECK_THROWS_AS((void)FourFrame(bad), std::invalid_argument);
}

TEST_CASE("bianchi-free cross term") {
    // For Bianchi tensors the universal cross term equals -2 l m R_1234.
    const CurvatureTensor r = random_gaussian(6, 88);
    const FourFrame f = FourFrame::standard(6);
    const double direct = r.component(1, 3, 1, 3) + 0.49 * r.component(1, 4, 1, 4)
                        + 0.25 * r.component(2, 3, 2, 3)
                        + 0.49 * 0.25 * r.component(2, 4, 2, 4)
                        - 2.0 * 0.7 * 0.5 * r.component(1, 2, 3, 4);
    CHECK(iso_value(r, f, 0.7, 0.5) == doctest::Approx(direct).epsilon(1e-12));

    // For a witness-type tensor the cross term is +2 l m (T_1342 + T_1423).
    Rng rng(17);
    const int N = pair_count(6);
    Eigen::MatrixXd e(N, N);
    for (int p = 0; p < N; ++p)
        for (int q = p; q < N; ++q) {
            e(p, q) = rng.gaussian();
            e(q, p) = e(p, q);
        }
    const CurvatureTensor t(6, e);
    const double expected = t.component(1, 3, 1, 3) + 0.49 * t.component(1, 4, 1, 4)
                          + 0.25 * t.component(2, 3, 2, 3)
                          + 0.1225 * t.component(2, 4, 2, 4)
                          + 2.0 * 0.7 * 0.5
                                * (t.component(1, 3, 4, 2) + t.component(1, 4, 2, 3));
    CHECK(iso_value(t, f, 0.7, 0.5, true) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lambda-mu closed-form minimization matches dense grids") {
    Rng rng(23);
    for (int trial = 0; trial < 150; ++trial) {
        const double A = rng.gaussian(), B = rng.gaussian(), C = rng.gaussian(),
                     D = rng.gaussian(), E = rng.gaussian();
        for (const IsoMode& mode : {IsoMode::pic(), IsoMode::pic1(), IsoMode::pic2()}) {
            const FrameEval ev = minimize_lambda_mu(A, B, C, D, E, mode);
            double grid_best = 1e300;
            const int steps = 400;
            if (mode.tag == IsoMode::Tag::Pic) {
                grid_best = A + B + C + D - 2.0 * E;
            } else if (mode.tag == IsoMode::Tag::Pic1) {
                for (int i = 0; i <= steps; ++i) {
                    const double l = static_cast<double>(i) / steps;
                    grid_best = std::min(grid_best,
                                         A + l * l * B + C + l * l * D - 2.0 * l * E);
                }
            } else {
                for (int i = 0; i <= steps; ++i)
                    for (int j = 0; j <= steps; ++j) {
                        const double l = static_cast<double>(i) / steps;
                        const double m = static_cast<double>(j) / steps;
                        grid_best = std::min(grid_best,
                                             A + l * l * B + m * m * C
                                                 + l * l * m * m * D - 2.0 * l * m * E);
                    }
            }
            CHECK(ev.value <= grid_best + 1e-12);
            CHECK(ev.value >= grid_best - 2e-4); // grid resolution bound
            // The reported (lambda, mu) reproduces the value exactly.
            const double direct = A + ev.lambda * ev.lambda * B + ev.mu * ev.mu * C
                                + ev.lambda * ev.lambda * ev.mu * ev.mu * D
                                - 2.0 * ev.lambda * ev.mu * E;
            CHECK(direct == doctest::Approx(ev.value).epsilon(1e-13));
        }
    }
}

TEST_CASE("min_iso on model tensors") {
    FrameSearchConfig cfg = FrameSearchConfig::full(32);
    cfg.threads = 2;
    const ConeMarginReport sph = min_iso(sphere_tensor(12, 1.0), IsoMode::pic(), cfg, 3);
    CHECK(sph.min_value == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(sph.converged);
    CHECK(std::abs(iso_value_at(sphere_tensor(12, 1.0), sph.frame, sph.lambda, sph.mu)
                   - sph.min_value) < 1e-12);

    const ConeMarginReport cyl2 = min_iso(cylinder_tensor(12, 1.0), IsoMode::pic2(), cfg, 4);
    CHECK(std::abs(cyl2.min_value) < 1e-7);
    const ConeMarginReport cyl1 = min_iso(cylinder_tensor(12, 1.0), IsoMode::pic1(), cfg, 5);
    CHECK(std::abs(cyl1.min_value) < 1e-7);

    CHECK_THROWS_AS(min_iso(zero_tensor(3), IsoMode::pic(), cfg, 1), std::invalid_argument);
}

TEST_CASE("membership and hierarchy") {
    FrameSearchConfig cfg = FrameSearchConfig::full(24);
    const CurvatureTensor idw = identity_wedge(5);
    CHECK(is_pic(idw, 1e-7, cfg, 1).member);
    CHECK(is_pic1(idw, 1e-7, cfg, 2).member);
    CHECK(is_pic2(idw, 1e-7, cfg, 3).member);
    const CurvatureTensor neg = idw * -1.0;
    CHECK_FALSE(is_pic(neg, 1e-7, cfg, 4).member);
    CHECK_FALSE(is_pic1(neg, 1e-7, cfg, 5).member);
    CHECK_FALSE(is_pic2(neg, 1e-7, cfg, 6).member);

    // PSD entries imply membership in every mode.
    for (int trial = 0; trial < 5; ++trial) {
        Rng rng(derive_seed(31, trial));
        const int N = pair_count(5);
        Eigen::MatrixXd g(N, N / 2 + 1);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < g.cols(); ++j) g(i, j) = rng.gaussian();
        const CurvatureTensor psd(5, Eigen::MatrixXd(g * g.transpose()));
        const ConeSummary s = cone_summary(psd, cfg, derive_seed(32, trial));
        CHECK(s.pic2 >= -1e-10 * psd.frobenius());
        CHECK(s.pic2 <= s.pic1 + 1e-12);
        CHECK(s.pic1 <= s.pic + 1e-12);
    }

    // Margins are ordered for generic tensors too.
    for (int trial = 0; trial < 5; ++trial) {
        const CurvatureTensor r = random_gaussian(6, derive_seed(33, trial));
        const ConeSummary s = cone_summary(r, cfg, derive_seed(34, trial));
        CHECK(s.pic2 <= s.pic1 + 1e-12);
        CHECK(s.pic1 <= s.pic + 1e-12);
    }
}

TEST_CASE("frame invariance and homogeneity") {
    const int n = 6;
    const CurvatureTensor r = random_gaussian(n, 61);
    const FrameSearchConfig cfg = FrameSearchConfig::full(); // default 64 restarts
    const double m = min_iso(r, IsoMode::pic(), cfg, 7).min_value;

    const CurvatureTensor rot = rotate_tensor(r, random_rotation(n, 62));
    const double m_rot = min_iso(rot, IsoMode::pic(), cfg, 8).min_value;
    CHECK(m_rot == doctest::Approx(m).epsilon(1e-8));

    const double m2 = min_iso(r * 2.5, IsoMode::pic(), cfg, 9).min_value;
    CHECK(m2 == doctest::Approx(2.5 * m).epsilon(1e-8));
}

TEST_CASE("optimizer determinism") {
    const CurvatureTensor r = random_gaussian(8, 71);
    FrameSearchConfig cfg = FrameSearchConfig::full(16);
    cfg.threads = 1;
    const ConeMarginReport a = min_iso(r, IsoMode::pic2(), cfg, 5);
    cfg.threads = 2;
    const ConeMarginReport b = min_iso(r, IsoMode::pic2(), cfg, 5);
    CHECK(a.min_value == b.min_value);
    CHECK(a.lambda == b.lambda);
    CHECK((a.frame - b.frame).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("product characterization on model cases") {
    FrameSearchConfig cfg = FrameSearchConfig::full(32);
    // The cylinder is PIC1 (margin 0) and its flat extension stays PIC.
    const CurvatureTensor cyl = cylinder_tensor(5, 1.0);
    const double m1 = min_iso(cyl, IsoMode::pic1(), cfg, 11).min_value;
    const double me = min_iso(extend_flat(cyl), IsoMode::pic(), cfg, 12).min_value;
    CHECK(std::abs(m1) < 1e-7);
    CHECK(std::abs(me) < 1e-7);

    // A strictly PIC1 tensor extends to a strictly PIC tensor.
    CurvatureTensor r = random_gaussian(5, 13);
    r.axpy(1.0, identity_wedge(5));
    const double p1 = min_iso(r, IsoMode::pic1(), cfg, 14).min_value;
    const double pe = min_iso(extend_flat(r), IsoMode::pic(), cfg, 15).min_value;
    CHECK(((p1 > 1e-5) == (pe > 1e-5)));
}

TEST_CASE("shifted predicates") {
    // theta must stay below 1/(2n(n-1)); at n = 12 the sphere leaves the
    // shifted-PIC cone once theta scal exceeds the sectional curvature.
    PinchingFunctions pf;
    pf.f = [](double) { return 0.0; };
    pf.g = [](double) { return 0.0; };
    pf.theta = 0.003;
    pf.n_const = 0.0;
    FrameSearchConfig cfg = FrameSearchConfig::full(24);

    const ShiftedMargins sm = shifted_predicates(sphere_tensor(12, 1.0), pf, cfg, 2);
    CHECK(sm.pic_shift > 0.0);
    CHECK(sm.pic2_shift > 0.0);
    CHECK(sm.ricci_pair > 0.0);

    // The sphere margin is exact: 8 (kappa/2 - theta scal).
    CHECK(sm.pic_shift == doctest::Approx(8.0 * (0.5 - 0.003 * 132.0)).epsilon(1e-7));

    PinchingFunctions pf2 = pf;
    pf2.theta = 0.0;
    pf2.n_const = 5.0;
    const ShiftedMargins sm2 = shifted_predicates(zero_tensor(12), pf2, cfg, 3);
    CHECK(sm2.ricci_pair == doctest::Approx(5.0));
}

TEST_CASE("pinching function grammar and spot checks") {
    CHECK(parse_pinching_expr("0.5")(7.0) == doctest::Approx(0.5));
    CHECK(parse_pinching_expr("2*sqrt")(9.0) == doctest::Approx(6.0));
    CHECK(parse_pinching_expr("1*log1p")(std::exp(1.0) - 1.0) == doctest::Approx(1.0));
    CHECK(parse_pinching_expr("3*pow:0.5")(4.0) == doctest::Approx(6.0));
    CHECK_THROWS(parse_pinching_expr("1*pow:1.5"));
    CHECK_THROWS(parse_pinching_expr("1*cosh"));

    PinchingFunctions pf;
    pf.f = parse_pinching_expr("0.3*sqrt");
    pf.g = parse_pinching_expr("0.1*log1p");
    pf.theta = 0.001;
    CHECK_NOTHROW(pf.spot_check(12));
    PinchingFunctions bad = pf;
    bad.f = [](double s) { return -s; };
    CHECK_THROWS(bad.spot_check(12));
}

TEST_CASE("F_t predicate") {
    FrameSearchConfig cfg = FrameSearchConfig::full(24);
    PinchingFunctions pf;
    pf.f = parse_pinching_expr("0");
    pf.g = parse_pinching_expr("0");

    // Degenerate pinching reduces exactly to the PIC2 margin.
    const CurvatureTensor r = random_gaussian(8, 91);
    const double ft = check_Ft(r, pf, cfg, 4).margin;
    const double p2 = min_iso(r, IsoMode::pic2(), cfg, 4).min_value;
    CHECK(ft == doctest::Approx(p2).epsilon(1e-10));

    // The cylinder sits on the F_t boundary: the (lambda, mu) = (0, 1) face
    // with e_3 = z is unaffected by the relaxation term.
    PinchingFunctions pf2 = pf;
    pf2.f = parse_pinching_expr("0.1");
    const double ftc = check_Ft(cylinder_tensor(12, 1.0), pf2, cfg, 5).margin;
    CHECK(std::abs(ftc) < 1e-7);

    // f only relaxes the box interior; on strictly PIC1 input the margin is
    // positive and f lifts the (0,0) face.
    PinchingFunctions pf3 = pf;
    pf3.f = parse_pinching_expr("5");
    CurvatureTensor r1 = cylinder_tensor(12, 1.0);
    r1.axpy(0.05, identity_wedge(12));
    CHECK(check_Ft(r1, pf3, cfg, 6).margin > 0.0);
    // At the flat-plane frame the (0,0) face value is exactly f + shift.
    Eigen::MatrixXd f00 = Eigen::MatrixXd::Zero(4, 12);
    f00(0, 0) = f00(1, 1) = f00(2, 11) = f00(3, 2) = 1.0; // e_3 = z
    CHECK(iso_value(r1, FourFrame(f00), 0.0, 0.0) + 5.0
          == doctest::Approx(5.0 + 0.05 * 2.0).epsilon(1e-12));
}

TEST_CASE("kappa region polynomial") {
    CHECK(lambda_mu_kappa_region(1.0, 1.0) == doctest::Approx(0.0));
    CHECK(lambda_mu_kappa_region(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(lambda_mu_kappa_region(1.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("E(b) condition margins") {
    const int n = 12;
    const FamilyParams p = family_params(n, b_max_for(n), ConeFamily::C);
    FrameSearchConfig cfg = FrameSearchConfig::full(16);

    const CurvatureTensor sph = sphere_tensor(n, 1.0);
    const EbMargins m = check_Eb(sph, sph, p, cfg, 8);
    CHECK(m.psd_T > 0.0);
    CHECK(std::abs(m.pic_S_minus_T) < 1e-9);
    CHECK(m.ricci_pair > 0.0);
    CHECK(m.frame_iv >= -1e-9);
    CHECK(m.scal_positive);

    // With T = 0 the (iv) deficit reduces to Ric_22 - Ric_11 <= 0, with
    // equality for the isotropic sphere.
    const EbMargins m0 = check_Eb(sph, zero_tensor(n), p, cfg, 9);
    CHECK(std::abs(m0.frame_iv) < 1e-9);
}

TEST_CASE("Etilde margins") {
    const int n = 12;
    const FamilyParams p = family_params(n, btilde_max_for(n), ConeFamily::Ctilde);
    FrameSearchConfig cfg = FrameSearchConfig::full(16);

    const EtildeResult sph = check_Etilde(sphere_tensor(n, 1.0), p, nullptr, cfg, 10);
    CHECK(sph.z_margin > 0.0);
    CHECK_FALSE(sph.conclusive);

    const EtildeResult cyl = check_Etilde(cylinder_tensor(n, 1.0), p, nullptr, cfg, 11);
    CHECK(cyl.z_margin > 0.0);

    // Homogeneity: Z(cS) = c Z(S).
    const EtildeResult cyl2 =
        check_Etilde(cylinder_tensor(n, 1.0) * 2.0, p, nullptr, cfg, 11);
    CHECK(cyl2.z_margin == doctest::Approx(2.0 * cyl.z_margin).epsilon(1e-6));

    // Witness sub-check reports conclusively.
    const CurvatureTensor wit = sphere_tensor(n, 1.0);
    const EtildeResult with_wit = check_Etilde(sphere_tensor(n, 1.0), p, &wit, cfg, 12);
    CHECK(with_wit.conclusive);
    REQUIRE(with_wit.eb.has_value());
}

TEST_CASE("G0 condition margins") {
    const int n = 12;
    FrameSearchConfig cfg = FrameSearchConfig::full(12);
    const G0Margins g = check_G0(sphere_tensor(n, 1.0), 1e-3, 0.0, 4, cfg, 13);
    CHECK(g.cond_i > 0.0);
    CHECK(g.cond_ii > 0.0);
    CHECK(g.cond_iii > 0.0);
    CHECK(g.cond_iv > 0.0);
    CHECK(g.scal_positive);

    // Condition (iii) fails for -id^id; (iv) is skipped (scal < 0).
    const G0Margins bad = check_G0(identity_wedge(n) * -1.0, 1e-3, 0.0, 3, cfg, 14);
    CHECK(bad.cond_iii < 0.0);
    CHECK_FALSE(bad.scal_positive);

    // delta -> 0 limit: (iii) approaches the plain PIC margin.
    const CurvatureTensor r = sphere_tensor(n, 1.0);
    const G0Margins tiny = check_G0(r, 1e-9, 0.0, 3, cfg, 15);
    const double pic = min_iso(r, IsoMode::pic(), cfg, 15).min_value;
    CHECK(tiny.cond_iii == doctest::Approx(pic).epsilon(1e-5));
}

TEST_CASE("cone-targeted sampling") {
    for (ConeKind kind : {ConeKind::Pic, ConeKind::Pic2}) {
        ConeSampleOptions opt;
        opt.target_margin = 0.05;
        const CurvatureTensor r = random_in_cone(12, kind, 99, opt);
        FrameSearchConfig cfg = FrameSearchConfig::full(24);
        const IsoMode mode = kind == ConeKind::Pic ? IsoMode::pic() : IsoMode::pic2();
        const double m = min_iso(r, mode, cfg, 100).min_value;
        CHECK(m >= 0.05 * r.frobenius() * (1.0 - 1e-4));
        CHECK(r.bianchi_defect() < 1e-9);
    }
    // Determinism.
    const CurvatureTensor a = random_in_cone(8, ConeKind::Pic, 5, {});
    const CurvatureTensor b = random_in_cone(8, ConeKind::Pic, 5, {});
    CHECK((a - b).frobenius() == 0.0);
}
