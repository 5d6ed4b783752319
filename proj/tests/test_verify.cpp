#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvcone/verify.hpp"

using namespace curvcone;

TEST_CASE("parameter lemma 1") {
    const LemmaReport rep = verify_parameters1({12, 13, 20}, 500);
    CHECK(rep.passed);
    CHECK(rep.worst_margin > 0.0);

    // b = b_max at n = 12: the cubic evaluates to the hand value.
    const double b = 1.0 / 48.0;
    const double cubic = 2.0 + 4.0 * b - 280.0 * b * b - 1200.0 * b * b * b;
    CHECK(cubic > 0.0);

    // Out-of-hypothesis dimensions are informational only.
    const LemmaReport low = verify_parameters1({11}, 100);
    CHECK(low.passed);
    CHECK(!low.note.empty());
}

TEST_CASE("parameter lemma 2") {
    std::vector<int> ns;
    for (int n = 12; n <= 64; ++n) ns.push_back(n);
    const LemmaReport rep = verify_parameters2(ns);
    CHECK(rep.passed);
    CHECK(rep.worst_margin >= 0.0);
}

TEST_CASE("parameter lemma 3") {
    const LemmaReport rep = verify_parameters3({12, 13, 20}, 500);
    CHECK(rep.passed);
}

TEST_CASE("quadratic inequality") {
    const LemmaReport rep = verify_quadratic_inequality(12, 1.0 / 48.0, 200, 4);
    CHECK(rep.passed);
    CHECK(rep.worst_margin >= -1e-12);

    // psi(0,0) = 8a.
    const FamilyParams p = family_params(12, 1.0 / 48.0, ConeFamily::C);
    const double psi00 = replay_witness([&] {
        LemmaReport r;
        r.lemma_id = "quadratic_inequality";
        r.worst_witness = {{"lemma", "quadratic_inequality"},
                           {"n", 12}, {"b", 1.0 / 48.0}, {"x", 0.0}, {"y", 0.0}};
        return r;
    }());
    CHECK(psi00 == doctest::Approx(8.0 * p.a).epsilon(1e-13));
}

TEST_CASE("algebraic fact") {
    for (double zeta : {0.0, 0.5, 1.0}) {
        const LemmaReport rep = verify_algebraic_fact(12, zeta, 1.0, 200, 11);
        CHECK(rep.passed);
    }
    // H = id at zeta = 0 is the equality case.
    LemmaReport probe;
    probe.lemma_id = "algebraic_fact";
    probe.worst_witness = {{"lemma", "algebraic_fact"}, {"n", 12},
                           {"zeta", 0.0}, {"rho", 1.0}, {"i", 0}, {"j", 1}};
    probe.worst_witness["spectrum"] = std::vector<double>(12, 1.0);
    CHECK(replay_witness(probe) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(verify_algebraic_fact(12, -0.1, 1.0, 10, 1), std::invalid_argument);
}

TEST_CASE("appendix A small bundle") {
    const LemmaReport rep = verify_appendixA_small(60, 13, {5, 8}, 2);
    CHECK(rep.passed);
    CHECK(rep.worst_margin >= -1e-7);
}

TEST_CASE("pic to pic1 error term") {
    const LemmaReport rep = verify_pic_to_pic1(6, 40, 15, 2);
    CHECK(rep.passed);
}

TEST_CASE("extension lemma") {
    const LemmaReport rep = verify_extension(5, 40, 17, 2);
    CHECK(rep.passed);
}

TEST_CASE("interpolation proposition") {
    const LemmaReport rep = verify_interpolation(5, 25, 19, 2);
    CHECK(rep.passed);
    CHECK(rep.inconclusive <= rep.trials / 20);
}

TEST_CASE("sharp tangent-cone proposition") {
    const LemmaReport rep = verify_sharp_tangent(5, 40, 21, 2);
    CHECK(rep.passed);
}

TEST_CASE("surgery transform") {
    const LemmaReport rep = verify_surgery_transform(12, {0.01, 0.02, 0.05}, 0.0, 23);
    CHECK(rep.passed);
    CHECK(rep.note.find("z=0.05") != std::string::npos);

    const LemmaReport pert = verify_surgery_transform(12, {0.02}, 0.01, 24);
    CHECK(pert.passed);

    CHECK_THROWS_AS(verify_surgery_transform(12, {0.2}, 0.0, 1), std::invalid_argument);
}

TEST_CASE("witness replay reproduces worst margins") {
    VerifyConfig cfg = VerifyConfig::defaults();
    cfg.n_list = {12, 13};
    cfg.n_list_small = {5};
    cfg.b_grid = 200;
    cfg.trials = 12;
    cfg.threads = 2;
    const std::vector<LemmaReport> reports = verify_all(cfg);
    for (const auto& rep : reports) {
        if (rep.worst_witness.is_null()) continue;
        const double replayed = replay_witness(rep);
        INFO(rep.lemma_id);
        CHECK(std::abs(replayed - rep.worst_margin)
              <= 1e-12 * std::max(1.0, std::abs(rep.worst_margin)));
    }
}

TEST_CASE("certificates are deterministic across thread counts") {
    VerifyConfig cfg = VerifyConfig::defaults();
    cfg.n_list = {12};
    cfg.n_list_small = {5};
    cfg.b_grid = 100;
    cfg.trials = 8;
    cfg.threads = 1;
    const std::string one = certificates_json(verify_all(cfg));
    cfg.threads = 2;
    const std::string two = certificates_json(verify_all(cfg));
    CHECK(one == two);
    CHECK(one.find("runtime") == std::string::npos);
}

TEST_CASE("junit output") {
    const LemmaReport rep = verify_parameters2({12});
    const std::string xml = junit_xml({rep});
    CHECK(xml.find("<testsuite") != std::string::npos);
    CHECK(xml.find("parameters2") != std::string::npos);
}
