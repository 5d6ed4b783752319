// Time integration of the Hamilton ODE and its coupled witness variant,
// with cone-margin monitoring along trajectories.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curvcone/cones.hpp"
#include "curvcone/quadratic.hpp"

namespace curvcone {

struct IntegratorConfig {
    enum class Method { RK4Fixed, RK45Adaptive };
    Method method = Method::RK4Fixed;
    double dt = 1e-4;          // fixed step, or the initial step when adaptive
    double rtol = 1e-8;
    double atol = 1e-10;
    double dt_min = 1e-12;
    double dt_max = 1e-2;
    double t_end = 1.0;
    bool normalize = false;    // project the RHS so frobenius(R) stays constant
    double scal_cap = 0.0;     // 0: default 1e6 x initial scal (when positive)
    int monitor_every = 10;

    static IntegratorConfig rk4(double dt, double t_end);
    static IntegratorConfig rk45(double t_end, double rtol = 1e-8);
};

enum class Termination { ReachedTEnd, ScalCap, StepUnderflow };

const char* termination_name(Termination t);

struct MonitorSpec {
    enum class Kind { Pic, Pic1, Pic2, KappaShiftPic, G0, Ft, ShiftedPic, RicciPair, Eb };
    Kind kind = Kind::Pic;
    std::string name;
    // KappaShiftPic: kappa' = 2(n-1) kappa^2 is co-integrated and the margin
    // of R - (kappa/2) id^id is tracked.
    double kappa0 = 0.0;
    // G0 parameters.
    double delta = 1e-3;
    int b_grid = 5;
    // Ft / shifted predicates.
    PinchingFunctions pinching;
    // Eb margins (needs the coupled witness).
    FamilyParams family;

    static MonitorSpec simple(Kind k);
    static MonitorSpec from_name(const std::string& name);
};

struct MonitorSample {
    double t = 0.0;
    double scal = 0.0;
    double ric_norm_sq = 0.0;
    std::vector<double> margins; // one per requested monitor (worst margin)
};

struct Trajectory {
    std::vector<double> times;
    std::vector<CurvatureTensor> states;
    std::vector<CurvatureTensor> witness_states; // only for coupled runs
    std::vector<MonitorSample> monitors;
    std::vector<std::string> monitor_names;
    Termination terminated = Termination::ReachedTEnd;
    int steps_taken = 0;

    std::string to_csv() const;
};

Trajectory integrate(const CurvatureTensor& r0, const OdeRhsKind& rhs,
                     const IntegratorConfig& cfg,
                     const std::vector<MonitorSpec>& monitors = {},
                     const CurvatureTensor* t0 = nullptr,
                     std::uint64_t seed = 1, int threads = 1);

struct ViolationReport {
    bool clean = true;
    double first_violation_time = 0.0;
    std::string monitor;
    double margin = 0.0;
    double worst_margin = 0.0;
    std::string worst_monitor;
};

// Scans recorded monitor samples for the first margin below -tol.
ViolationReport scan_monitors(const Trajectory& traj, double tol = 1e-7);

// Coupled run: dS = Q(S) + D_{a,b}(S), dT = S^2 + eps scal(S)^2 id^id, with
// the four E(b) condition margins recorded at every monitor sample.
Trajectory coupled_Eb_run(const CurvatureTensor& s0, const CurvatureTensor& t0,
                          const FamilyParams& params, double epsilon,
                          const IntegratorConfig& cfg, std::uint64_t seed = 1,
                          int threads = 1);

// Samples tensors compatible with the E(b) Ricci condition and returns half
// the smallest observed min_iso(D_{a,b}(S), PIC) / (8 scal^2) ratio; returns
// 0 with `positive = false` when a negative ratio shows up.
struct EpsilonEstimate {
    double epsilon = 0.0;
    bool positive = false;
    double worst_ratio = 0.0;
    int samples = 0;
};
EpsilonEstimate estimate_epsilon(const FamilyParams& params, int samples,
                                 std::uint64_t seed, int threads = 1);

} // namespace curvcone
