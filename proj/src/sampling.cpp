// Rejection sampling into the cone interiors: Gaussian draw, Bianchi
// projection, then a shift along id^id sized so the requested relative
// margin is met. id^id is interior to all three cones, so the shift is an
// interior retraction.
#include "curvcone/cones.hpp"

#include <cmath>

namespace curvcone {

namespace {

IsoMode mode_for(ConeKind kind) {
    switch (kind) {
        case ConeKind::Pic: return IsoMode::pic();
        case ConeKind::Pic1: return IsoMode::pic1();
        case ConeKind::Pic2: return IsoMode::pic2();
    }
    throw std::invalid_argument("mode_for: bad cone kind");
}

} // namespace

CurvatureTensor random_in_cone(int n, ConeKind kind, std::uint64_t seed,
                               const ConeSampleOptions& opt) {
    if (n < 4) throw std::invalid_argument("random_in_cone: need n >= 4");
    const IsoMode mode = mode_for(kind);
    const CurvatureTensor idw = identity_wedge(n);
    const double idw_norm = idw.frobenius();
    // The per-frame shift slope is 8 for PIC and at least 2 otherwise; the
    // target relative margin must stay below slope/|id^id| for the root to exist.
    const double slope = (kind == ConeKind::Pic) ? 8.0 : 2.0;
    if (opt.target_margin * 1.06 + 1e-3 >= 0.97 * slope / idw_norm)
        throw std::invalid_argument("random_in_cone: target margin unattainable at this n");

    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        const std::uint64_t s = derive_seed(seed, attempt);
        CurvatureTensor r0 = random_gaussian(n, s);
        r0 = r0 * (1.0 / r0.frobenius());
        const double ip = r0.inner(idw);
        const auto frob_at = [&](double c) {
            return std::sqrt(std::max(1.0 + 2.0 * c * ip + c * c * idw_norm * idw_norm, 0.0));
        };

        FrameSearchConfig cfg = FrameSearchConfig::light(opt.restarts);
        const ConeMarginReport base = min_iso(r0, mode, cfg, derive_seed(s, 1));
        // Solve for a slightly inflated target so optimizer noise in the
        // verification pass cannot drop the sample below the requested margin.
        const double t_solve = opt.target_margin * 1.06 + 1e-3;
        double c = 0.0;
        if (kind == ConeKind::Pic) {
            // margin(c) = m0 + 8c exactly; solve m0 + 8c = t * frob(c) on scalars.
            const double m0 = base.min_value;
            const double t = t_solve;
            c = (t - m0) / 8.0;
            for (int it = 0; it < 60; ++it) {
                const double h = m0 + 8.0 * c - t * frob_at(c);
                const double dh = 8.0 - t * (ip + c * idw_norm * idw_norm)
                                          / std::max(frob_at(c), 1e-12);
                const double step = h / dh;
                c -= step;
                if (std::abs(step) < 1e-14 * (1.0 + std::abs(c))) break;
            }
        } else {
            // Bisection on h(c) = margin(c) - t * frob(c); h is increasing for
            // admissible targets.
            Eigen::MatrixXd warm = base.frame;
            const auto margin_at = [&](double c_val, std::uint64_t k) {
                CurvatureTensor shifted = r0;
                shifted.axpy(c_val, idw);
                FrameSearchConfig sub = FrameSearchConfig::monitor(&warm, 4);
                const ConeMarginReport rep = min_iso(shifted, mode, sub, derive_seed(s, 100 + k));
                warm = rep.frame;
                return rep.min_value;
            };
            const double t = t_solve;
            double lo = 0.0;
            double h_lo = base.min_value - t * frob_at(0.0);
            int guard = 0;
            while (h_lo > 0.0 && guard++ < 20) {
                lo -= 0.25;
                h_lo = margin_at(lo, guard) - t * frob_at(lo);
            }
            double hi = std::max(1.0, (t - base.min_value) / (2.0 - t * idw_norm));
            double h_hi = margin_at(hi, 50) - t * frob_at(hi);
            guard = 0;
            while (h_hi < 0.0 && guard++ < 20) {
                hi *= 2.0;
                h_hi = margin_at(hi, 60 + guard) - t * frob_at(hi);
            }
            if (h_lo > 0.0 || h_hi < 0.0) continue; // resample
            for (int it = 0; it < 40 && hi - lo > 1e-10 * (1.0 + std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double h = margin_at(mid, 200 + it) - t * frob_at(mid);
                (h < 0.0 ? lo : hi) = mid;
            }
            c = hi; // upper end keeps the margin on the safe side
        }

        CurvatureTensor out = r0;
        out.axpy(c, idw);
        // Verify with a fresh search; resample on a miss.
        FrameSearchConfig verify = FrameSearchConfig::light(std::max(opt.restarts, 16));
        const double margin = min_iso(out, mode, verify, derive_seed(s, 7)).min_value;
        if (margin >= opt.target_margin * out.frobenius() * (1.0 - 1e-6))
            return out;
    }
    throw std::runtime_error("random_in_cone: sampler exhausted max attempts");
}

} // namespace curvcone
