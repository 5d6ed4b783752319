// Numerical certification of the closed-form lemmas: exhaustive grids for
// the parameter inequalities, seeded property trials for the frame-based
// statements, and the surgery transform check. Every report carries a
// replayable worst-case witness.
#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "curvcone/cones.hpp"

namespace curvcone {

struct LemmaReport {
    std::string lemma_id;
    std::vector<int> n_range;
    long grid_points = 0;
    long trials = 0;
    long inconclusive = 0;
    double worst_margin = 0.0;
    nlohmann::json worst_witness;
    double tol = 0.0;
    bool passed = false;
    long runtime_ms = 0; // not serialized into certificates
    std::string note;

    nlohmann::json to_json() const; // deterministic (runtime_ms omitted)
};

// Non-strict inequalities pass at margin >= -kSlackTol; strict ones are
// certified as margin >= kStrictTol at every grid point.
inline constexpr double kStrictTol = 1e-12;
inline constexpr double kSlackTol = 1e-12;

LemmaReport verify_parameters1(const std::vector<int>& n_list, int b_grid_size);
LemmaReport verify_parameters2(const std::vector<int>& n_list);
LemmaReport verify_parameters3(const std::vector<int>& n_list, int b_grid_size);
LemmaReport verify_quadratic_inequality(int n, double b, int grid, int refine);
LemmaReport verify_algebraic_fact(int n, double zeta, double rho, int trials,
                                  std::uint64_t seed);
// Bundles the wedge-product, largest-Ricci-eigenvalue, and four-positivity
// statements (per dimension in n_list).
LemmaReport verify_appendixA_small(int trials, std::uint64_t seed,
                                   const std::vector<int>& n_list, int threads = 1);
LemmaReport verify_pic_to_pic1(int n, int trials, std::uint64_t seed, int threads = 1);
// One-extra-dimension extension: sign agreement and the restriction
// inequality between the extended PIC margin and the Z margin.
LemmaReport verify_extension(int n, int trials, std::uint64_t seed, int threads = 1);
LemmaReport verify_interpolation(int n, int trials, std::uint64_t seed, int threads = 1);
LemmaReport verify_sharp_tangent(int n, int trials, std::uint64_t seed, int threads = 1);
LemmaReport verify_surgery_transform(int n, const std::vector<double>& z_grid,
                                     double neck_perturbation, std::uint64_t seed);

struct VerifyConfig {
    std::vector<int> n_list;        // parameter lemmas; default 12..20
    std::vector<int> n_list_small;  // sampled lemmas; default {5, 8, 12}
    int b_grid = 10000;
    int trials = 100;
    std::uint64_t seed = 7;
    int threads = 1;

    static VerifyConfig defaults();
};

std::vector<LemmaReport> verify_all(const VerifyConfig& cfg);

// Re-evaluates the recorded worst witness of a report; the result must
// reproduce worst_margin to 1e-12.
double replay_witness(const LemmaReport& report);

std::string certificates_json(const std::vector<LemmaReport>& reports);
std::string junit_xml(const std::vector<LemmaReport>& reports);

} // namespace curvcone
