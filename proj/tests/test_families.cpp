#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvcone/families.hpp"

using namespace curvcone;

TEST_CASE("family C parameters at the endpoint") {
    const int n = 12;
    const double b = b_max_for(n);
    CHECK(b == doctest::Approx(1.0 / 48.0));
    const FamilyParams p = family_params(n, b, ConeFamily::C);
    const double u = 2.0 + 10.0 / 48.0;
    const double v = 2.0 + 9.0 / 48.0;
    CHECK(p.a == doctest::Approx(u * u / (2.0 * v) / 48.0).epsilon(1e-15));
    // a <= (9/8) b along the whole curve.
    for (int j = 1; j <= 50; ++j) {
        const double bj = b * j / 50.0;
        const FamilyParams pj = family_params(n, bj, ConeFamily::C);
        CHECK(pj.a <= 9.0 / 8.0 * bj + 1e-15);
    }
    CHECK(p.gamma == doctest::Approx(b / v));
    // omega^2 recomputes from the display.
    const double w2 = 27.0 * u / 8.0 * std::pow(1.0 - 40.0 * b * b, 4)
                    * std::pow(1.0 + 10.0 * b, 2) / (144.0 * b * b * v * v);
    CHECK(p.omega * p.omega == doctest::Approx(w2).epsilon(1e-13));
}

TEST_CASE("family Ctilde parameters") {
    CHECK(btilde_max_for(12) == doctest::Approx(1.0 / 115.0));
    CHECK(btilde_max_for(13) == doctest::Approx(1.0 / 147.0));
    const FamilyParams p = family_params(12, 1.0 / 115.0, ConeFamily::Ctilde);
    CHECK(2.0 * p.a == doctest::Approx(2.0 / 115.0 + 10.0 / (115.0 * 115.0)).epsilon(1e-15));
    CHECK(p.zeta <= 1.0);
}

TEST_CASE("range checks") {
    CHECK_THROWS_AS(family_params(12, 0.0, ConeFamily::C), std::invalid_argument);
    CHECK_THROWS_AS(family_params(12, 1.0, ConeFamily::C), std::invalid_argument);
    CHECK_THROWS_AS(family_params(12, 0.02, ConeFamily::Ctilde), std::invalid_argument);
    CHECK_FALSE(family_params(11, b_max_for(11), ConeFamily::C).in_hypothesis);
}
