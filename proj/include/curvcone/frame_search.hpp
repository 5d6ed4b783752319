// Multistart minimization over Stiefel frames (orthonormal k-tuples in R^n).
//
// A restart draws its starting frame from exp(A) Q0 with A a random skew
// matrix on a random 8-dimensional subalgebra, then refines by derivative-
// free descent: perturb the rows, re-orthonormalize, accept on improvement.
// Restarts derive their seeds from (master seed, restart index), so results
// are bit-stable regardless of thread scheduling.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "curvcone/tensor.hpp"

namespace curvcone {

struct FrameEval {
    double value = 0.0;
    double lambda = 1.0;
    double mu = 1.0;
};

// Per-frame objective; any lambda/mu structure is minimized in closed form
// inside evaluate().
class FrameObjective {
public:
    virtual ~FrameObjective() = default;
    virtual int n() const = 0;
    virtual int frame_size() const = 0; // rows of the frame (2 or 4)
    virtual FrameEval evaluate(const Eigen::MatrixXd& frame) const = 0;
    // Magnitude used for relative tolerances (typically the tensor norm).
    virtual double scale() const { return 1.0; }
    // Structure-informed starting frames (extremal eigenplanes etc.); used
    // as extra restart seeds before the random ones.
    virtual std::vector<Eigen::MatrixXd> suggested_frames() const { return {}; }
};

struct FrameSearchConfig {
    int restarts = 64;
    int max_iters = 300;
    double init_step = 0.35;
    double objective_tol = 1e-10; // accept a step only below this decrease
    double step_floor = 1e-8;
    double grad_tol = 1e-5;       // relative; convergence flag threshold
    bool compute_gradient = true;
    int polish_sweeps = 18;       // deterministic rotation sweeps
    int polish_candidates = 6;    // best restarts refined by the sweeps
    int threads = 1;
    const Eigen::MatrixXd* warm_start = nullptr;

    static FrameSearchConfig full(int restarts = 64);
    static FrameSearchConfig light(int restarts = 12);
    // Warm-started budget for trajectory monitors.
    static FrameSearchConfig monitor(const Eigen::MatrixXd* warm, int fresh_restarts = 6);
};

struct FrameSearchResult {
    double value = 0.0;
    Eigen::MatrixXd frame;
    double lambda = 1.0;
    double mu = 1.0;
    int restarts_used = 0;
    bool converged = false;
    double gradient_norm = 0.0;
};

FrameSearchResult minimize_over_frames(const FrameObjective& obj,
                                       const FrameSearchConfig& cfg,
                                       std::uint64_t seed);

// Independent search used to cross-check the optimizer: uniform random
// frames (each with the exact per-frame lambda/mu minimization), followed by
// golden-section sweeps over Givens angles from the best samples. Shares
// only the objective evaluation with the optimizer.
FrameSearchResult dense_frame_search(const FrameObjective& obj,
                                     std::size_t samples, int polish_top,
                                     std::uint64_t seed, int threads = 1);

} // namespace curvcone
