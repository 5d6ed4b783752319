#include "curvcone/frame_search.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "curvcone/parallel.hpp"

namespace curvcone {

FrameSearchConfig FrameSearchConfig::full(int restarts) {
    FrameSearchConfig c;
    c.restarts = restarts;
    return c;
}

FrameSearchConfig FrameSearchConfig::light(int restarts) {
    FrameSearchConfig c;
    c.restarts = restarts;
    c.max_iters = 220;
    c.compute_gradient = false;
    c.polish_sweeps = 14;
    c.polish_candidates = 3;
    return c;
}

FrameSearchConfig FrameSearchConfig::monitor(const Eigen::MatrixXd* warm, int fresh_restarts) {
    FrameSearchConfig c;
    c.restarts = fresh_restarts + (warm ? 1 : 0);
    c.max_iters = 150;
    c.compute_gradient = false;
    c.polish_sweeps = 12;
    c.polish_candidates = 2;
    c.warm_start = warm;
    return c;
}

namespace {

// Haar-ish random orthonormal k x n frame.
Eigen::MatrixXd random_frame(int k, int n, Rng& rng) {
    Eigen::MatrixXd m(k, n);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = rng.gaussian();
    return orthonormalize_rows(std::move(m));
}

// Restart frame: first k rows of exp(A) applied to a random basis of an
// 8-dimensional subspace (the whole space when n <= 8).
Eigen::MatrixXd restart_frame(int k, int n, Rng& rng) {
    const int m = std::min(n, 8);
    Eigen::MatrixXd basis = random_frame(m, n, rng);
    Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = r + 1; c < m; ++c) {
            skew(r, c) = 2.0 * rng.gaussian();
            skew(c, r) = -skew(r, c);
        }
    const Eigen::MatrixXd rot = skew.exp();
    Eigen::MatrixXd frame = (rot * basis).topRows(k);
    return orthonormalize_rows(std::move(frame));
}

struct LocalResult {
    double value = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd frame;
    double lambda = 1.0, mu = 1.0;
};

LocalResult descend(const FrameObjective& obj, Eigen::MatrixXd frame,
                    const FrameSearchConfig& cfg, Rng& rng) {
    const int k = obj.frame_size();
    const int n = obj.n();
    const double tol = cfg.objective_tol * std::max(1.0, obj.scale());
    LocalResult best;
    {
        const FrameEval ev = obj.evaluate(frame);
        best = {ev.value, frame, ev.lambda, ev.mu};
    }
    double step = cfg.init_step;
    Eigen::MatrixXd cand(k, n);
    for (int it = 0; it < cfg.max_iters && step > cfg.step_floor; ++it) {
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < n; ++c) cand(r, c) = best.frame(r, c) + step * rng.gaussian();
        Eigen::MatrixXd trial = orthonormalize_rows(cand);
        const FrameEval ev = obj.evaluate(trial);
        if (ev.value < best.value - tol) {
            best = {ev.value, std::move(trial), ev.lambda, ev.mu};
            step = std::min(step * 1.4, 0.8);
        } else {
            step *= 0.65;
        }
    }
    return best;
}

// Deterministic refinement: quadratic line probes over rotation directions
// (intra-frame planes and row-vs-complement rotations), sweeping with a
// shrinking angle. Exact rotations keep the frame orthonormal; a full
// re-orthonormalization runs once per sweep to scrub rounding.
void polish_frame(const FrameObjective& obj, Eigen::MatrixXd& frame, double& value,
                  int sweeps, double width0) {
    const int k = static_cast<int>(frame.rows());
    const int n = static_cast<int>(frame.cols());
    const double tol = 1e-14 * std::max(1.0, obj.scale());
    double width = width0;

    const auto probe_direction = [&](int a, int b_intra, const Eigen::RowVectorXd* v) {
        const auto rotated = [&](double th) {
            Eigen::MatrixXd f = frame;
            if (v) {
                f.row(a) = std::cos(th) * frame.row(a) + std::sin(th) * (*v);
            } else {
                f.row(a) = std::cos(th) * frame.row(a) + std::sin(th) * frame.row(b_intra);
                f.row(b_intra) = -std::sin(th) * frame.row(a)
                               + std::cos(th) * frame.row(b_intra);
            }
            return f;
        };
        const double vp = obj.evaluate(rotated(width)).value;
        const double vm = obj.evaluate(rotated(-width)).value;
        double best_th = 0.0, best_v = value;
        if (vp < best_v) { best_v = vp; best_th = width; }
        if (vm < best_v) { best_v = vm; best_th = -width; }
        const double curv = vp + vm - 2.0 * value;
        if (curv > 1e-300) {
            double th = -0.5 * width * (vp - vm) / curv;
            th = std::max(-2.5 * width, std::min(2.5 * width, th));
            const double vt = obj.evaluate(rotated(th)).value;
            if (vt < best_v) { best_v = vt; best_th = th; }
        }
        if (best_v < value - tol) {
            frame = rotated(best_th);
            value = best_v;
            return true;
        }
        return false;
    };

    int stalled = 0;
    for (int sweep = 0; sweep < sweeps && width > 1e-11; ++sweep) {
        const double before = value;
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b) probe_direction(a, b, nullptr);
        for (int c = 0; c < n; ++c) {
            for (int a = 0; a < k; ++a) {
                // Rebuild the complement direction against the current rows.
                Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(n);
                v(c) = 1.0;
                for (int r = 0; r < k; ++r) v -= v.dot(frame.row(r)) * frame.row(r);
                const double nrm = v.norm();
                if (nrm < 1e-8) continue;
                v /= nrm;
                probe_direction(a, 0, &v);
            }
        }
        frame = orthonormalize_rows(frame);
        value = obj.evaluate(frame).value;
        width *= 0.45;
        stalled = (value > before - 10.0 * tol) ? stalled + 1 : 0;
        if (stalled >= 2 && width < 1e-6) break;
    }
}

// Tangent directions at a frame: intra-frame plane rotations and rotations
// of one row toward a (projected) coordinate direction of the complement.
double gradient_norm_estimate(const FrameObjective& obj, const Eigen::MatrixXd& frame) {
    const int k = static_cast<int>(frame.rows());
    const int n = static_cast<int>(frame.cols());
    const double h = 1e-5;
    double sum_sq = 0.0;
    const auto value_at = [&](const Eigen::MatrixXd& f) { return obj.evaluate(f).value; };

    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
            Eigen::MatrixXd fp = frame, fm = frame;
            const double c = std::cos(h), s = std::sin(h);
            fp.row(a) = c * frame.row(a) + s * frame.row(b);
            fp.row(b) = -s * frame.row(a) + c * frame.row(b);
            fm.row(a) = c * frame.row(a) - s * frame.row(b);
            fm.row(b) = s * frame.row(a) + c * frame.row(b);
            const double g = (value_at(fp) - value_at(fm)) / (2.0 * h);
            sum_sq += g * g;
        }
    for (int c0 = 0; c0 < n; ++c0) {
        Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(n);
        v(c0) = 1.0;
        for (int r = 0; r < k; ++r) v -= v.dot(frame.row(r)) * frame.row(r);
        const double nrm = v.norm();
        if (nrm < 1e-8) continue;
        v /= nrm;
        for (int a = 0; a < k; ++a) {
            Eigen::MatrixXd fp = frame, fm = frame;
            const double c = std::cos(h), s = std::sin(h);
            fp.row(a) = c * frame.row(a) + s * v;
            fm.row(a) = c * frame.row(a) - s * v;
            const double g = (value_at(fp) - value_at(fm)) / (2.0 * h);
            sum_sq += g * g;
        }
    }
    return std::sqrt(sum_sq);
}

} // namespace

FrameSearchResult minimize_over_frames(const FrameObjective& obj,
                                       const FrameSearchConfig& cfg,
                                       std::uint64_t seed) {
    const int k = obj.frame_size();
    const int n = obj.n();
    if (n < k) throw std::invalid_argument("minimize_over_frames: n < frame size");
    const std::vector<Eigen::MatrixXd> suggested = obj.suggested_frames();
    const int restarts =
        std::max(cfg.restarts, 1) + static_cast<int>(suggested.size());
    std::vector<LocalResult> results(restarts);

    parallel_for(restarts, cfg.threads, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        Eigen::MatrixXd start;
        std::size_t fixed = 0;
        if (cfg.warm_start && cfg.warm_start->rows() == k) {
            if (r == 0) {
                results[r] = descend(obj, orthonormalize_rows(*cfg.warm_start), cfg, rng);
                return;
            }
            fixed = 1;
        }
        if (r == fixed) {
            start = Eigen::MatrixXd::Zero(k, n);
            for (int a = 0; a < k; ++a) start(a, a) = 1.0;
        } else if (r - fixed - 1 < suggested.size()) {
            start = orthonormalize_rows(suggested[r - fixed - 1]);
        } else {
            start = restart_frame(k, n, rng);
        }
        results[r] = descend(obj, std::move(start), cfg, rng);
    });

    // Refine the best few restarts by deterministic rotation sweeps.
    std::vector<int> order(restarts);
    for (int r = 0; r < restarts; ++r) order[r] = r;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (results[a].value != results[b].value) return results[a].value < results[b].value;
        return a < b;
    });
    const int polish = std::min<int>(std::max(cfg.polish_candidates, 1), restarts);
    parallel_for(polish, cfg.threads, [&](std::size_t i) {
        LocalResult& cand = results[order[i]];
        polish_frame(obj, cand.frame, cand.value, cfg.polish_sweeps, 0.08);
        const FrameEval ev = obj.evaluate(cand.frame);
        cand.value = ev.value;
        cand.lambda = ev.lambda;
        cand.mu = ev.mu;
    });

    int best_idx = 0;
    for (int r = 1; r < restarts; ++r)
        if (results[r].value < results[best_idx].value) best_idx = r;
    LocalResult& best = results[best_idx];

    FrameSearchResult out;
    out.value = best.value;
    out.frame = best.frame;
    out.lambda = best.lambda;
    out.mu = best.mu;
    out.restarts_used = restarts;
    if (cfg.compute_gradient) {
        out.gradient_norm = gradient_norm_estimate(obj, best.frame);
        out.converged = out.gradient_norm <= cfg.grad_tol * std::max(1.0, obj.scale());
    } else {
        out.gradient_norm = std::numeric_limits<double>::quiet_NaN();
        out.converged = true;
    }
    return out;
}

namespace {

// Golden-section line search over a Givens angle applied to (row a, dir v).
double givens_line_search(const FrameObjective& obj, Eigen::MatrixXd& frame,
                          int a, const Eigen::RowVectorXd& v, double half_width,
                          double current) {
    const double gr = 0.6180339887498949;
    const auto rotated_value = [&](double th) {
        Eigen::MatrixXd f = frame;
        f.row(a) = std::cos(th) * frame.row(a) + std::sin(th) * v;
        return obj.evaluate(f).value;
    };
    double lo = -half_width, hi = half_width;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = rotated_value(x1), f2 = rotated_value(x2);
    for (int it = 0; it < 24; ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = rotated_value(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = rotated_value(x2);
        }
    }
    const double th = (f1 < f2) ? x1 : x2;
    const double val = std::min(f1, f2);
    if (val < current) {
        frame.row(a) = (std::cos(th) * frame.row(a) + std::sin(th) * v).eval();
        return val;
    }
    return current;
}

} // namespace

FrameSearchResult dense_frame_search(const FrameObjective& obj,
                                     std::size_t samples, int polish_top,
                                     std::uint64_t seed, int threads) {
    const int k = obj.frame_size();
    const int n = obj.n();
    struct Sample {
        double value;
        std::uint64_t seed;
    };
    const int nt = resolve_threads(threads);
    const std::size_t chunk = (samples + nt - 1) / std::max(nt, 1);
    std::vector<std::vector<Sample>> tops(static_cast<std::size_t>(nt));
    const std::size_t keep = static_cast<std::size_t>(std::max(polish_top, 1));

    parallel_for(static_cast<std::size_t>(nt), threads, [&](std::size_t t) {
        auto& top = tops[t];
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(samples, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) {
            const std::uint64_t si = derive_seed(seed, i);
            Rng rng(si);
            const Eigen::MatrixXd f = random_frame(k, n, rng);
            const double v = obj.evaluate(f).value;
            if (top.size() < keep) {
                top.push_back({v, si});
                std::push_heap(top.begin(), top.end(),
                               [](const Sample& a, const Sample& b) { return a.value < b.value; });
            } else if (v < top.front().value) {
                std::pop_heap(top.begin(), top.end(),
                              [](const Sample& a, const Sample& b) { return a.value < b.value; });
                top.back() = {v, si};
                std::push_heap(top.begin(), top.end(),
                               [](const Sample& a, const Sample& b) { return a.value < b.value; });
            }
        }
    });

    std::vector<Sample> merged;
    for (const auto& t : tops) merged.insert(merged.end(), t.begin(), t.end());
    std::sort(merged.begin(), merged.end(), [](const Sample& a, const Sample& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.seed < b.seed;
    });
    if (merged.size() > keep) merged.resize(keep);

    FrameSearchResult out;
    out.value = std::numeric_limits<double>::infinity();
    out.restarts_used = static_cast<int>(samples);
    out.converged = true;
    out.gradient_norm = std::numeric_limits<double>::quiet_NaN();

    std::vector<FrameSearchResult> polished(merged.size());
    parallel_for(merged.size(), threads, [&](std::size_t idx) {
        Rng rng(merged[idx].seed);
        Eigen::MatrixXd frame = random_frame(k, n, rng);
        double value = obj.evaluate(frame).value;
        double width = 0.4;
        while (width > 1e-9) {
            double before = value;
            for (int a = 0; a < k; ++a)
                for (int b = a + 1; b < k; ++b)
                    value = givens_line_search(obj, frame, a, frame.row(b), width, value);
            for (int c0 = 0; c0 < n; ++c0) {
                Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(n);
                v(c0) = 1.0;
                for (int r = 0; r < k; ++r) v -= v.dot(frame.row(r)) * frame.row(r);
                const double nrm = v.norm();
                if (nrm < 1e-8) continue;
                v /= nrm;
                for (int a = 0; a < k; ++a)
                    value = givens_line_search(obj, frame, a, v, width, value);
            }
            frame = orthonormalize_rows(frame);
            value = obj.evaluate(frame).value;
            if (value > before - 1e-14 * std::max(1.0, obj.scale())) width *= 0.35;
        }
        const FrameEval ev = obj.evaluate(frame);
        polished[idx] = FrameSearchResult{ev.value, frame, ev.lambda, ev.mu,
                                          static_cast<int>(samples), true,
                                          std::numeric_limits<double>::quiet_NaN()};
    });

    for (const auto& p : polished)
        if (p.value < out.value) out = p;
    return out;
}

} // namespace curvcone
