#include "curvcone/ode.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "curvcone/parallel.hpp"

namespace curvcone {

IntegratorConfig IntegratorConfig::rk4(double dt, double t_end) {
    IntegratorConfig c;
    c.method = Method::RK4Fixed;
    c.dt = dt;
    c.t_end = t_end;
    return c;
}

IntegratorConfig IntegratorConfig::rk45(double t_end, double rtol) {
    IntegratorConfig c;
    c.method = Method::RK45Adaptive;
    c.dt = 1e-4;
    c.rtol = rtol;
    c.atol = 1e-12;
    c.t_end = t_end;
    return c;
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::ReachedTEnd: return "reached_t_end";
        case Termination::ScalCap: return "scal_cap";
        case Termination::StepUnderflow: return "step_underflow";
    }
    return "unknown";
}

MonitorSpec MonitorSpec::simple(Kind k) {
    MonitorSpec s;
    s.kind = k;
    switch (k) {
        case Kind::Pic: s.name = "pic"; break;
        case Kind::Pic1: s.name = "pic1"; break;
        case Kind::Pic2: s.name = "pic2"; break;
        case Kind::KappaShiftPic: s.name = "kappa_pic"; break;
        case Kind::G0: s.name = "g0"; break;
        case Kind::Ft: s.name = "ft"; break;
        case Kind::ShiftedPic: s.name = "shifted_pic"; break;
        case Kind::RicciPair: s.name = "ricci_pair"; break;
        case Kind::Eb: s.name = "eb"; break;
    }
    return s;
}

MonitorSpec MonitorSpec::from_name(const std::string& name) {
    if (name == "pic") return simple(Kind::Pic);
    if (name == "pic1") return simple(Kind::Pic1);
    if (name == "pic2") return simple(Kind::Pic2);
    if (name == "kappa-pic") return simple(Kind::KappaShiftPic);
    if (name == "g0") return simple(Kind::G0);
    if (name == "ft") return simple(Kind::Ft);
    if (name == "shifted-pic") return simple(Kind::ShiftedPic);
    if (name == "ricci-pair") return simple(Kind::RicciPair);
    throw std::invalid_argument("monitor: unknown name " + name);
}

namespace {

struct OdeState {
    CurvatureTensor r;
    std::optional<CurvatureTensor> t;
    double kappa = 0.0;
    bool has_kappa = false;
};

struct OdeDeriv {
    CurvatureTensor dr;
    std::optional<CurvatureTensor> dt;
    double dkappa = 0.0;
};

OdeDeriv eval_rhs(const OdeRhsKind& kind, const OdeState& y, bool normalize) {
    OdeDeriv d;
    OdeRhsValue v = ode_rhs(kind, y.r, y.t ? &*y.t : nullptr);
    d.dr = std::move(v.ds);
    if (normalize) {
        const double num = d.dr.inner(y.r);
        const double den = y.r.inner(y.r);
        if (den > 0.0) d.dr.axpy(-num / den, y.r);
    }
    if (v.dt) d.dt = std::move(*v.dt);
    if (y.has_kappa)
        d.dkappa = 2.0 * (y.r.n() - 1.0) * y.kappa * y.kappa;
    return d;
}

OdeState state_axpy(const OdeState& y, double c, const OdeDeriv& d) {
    OdeState out = y;
    out.r.axpy(c, d.dr);
    if (out.t && d.dt) out.t->axpy(c, *d.dt);
    if (out.has_kappa) out.kappa += c * d.dkappa;
    return out;
}

bool state_finite(const OdeState& y) {
    if (!y.r.entries().allFinite()) return false;
    if (y.t && !y.t->entries().allFinite()) return false;
    if (y.has_kappa && !std::isfinite(y.kappa)) return false;
    return true;
}

OdeState rk4_step(const OdeRhsKind& kind, const OdeState& y, double h, bool normalize) {
    const OdeDeriv k1 = eval_rhs(kind, y, normalize);
    const OdeDeriv k2 = eval_rhs(kind, state_axpy(y, 0.5 * h, k1), normalize);
    const OdeDeriv k3 = eval_rhs(kind, state_axpy(y, 0.5 * h, k2), normalize);
    const OdeDeriv k4 = eval_rhs(kind, state_axpy(y, h, k3), normalize);
    OdeState out = y;
    out.r.axpy(h / 6.0, k1.dr);
    out.r.axpy(h / 3.0, k2.dr);
    out.r.axpy(h / 3.0, k3.dr);
    out.r.axpy(h / 6.0, k4.dr);
    if (out.t) {
        out.t->axpy(h / 6.0, *k1.dt);
        out.t->axpy(h / 3.0, *k2.dt);
        out.t->axpy(h / 3.0, *k3.dt);
        out.t->axpy(h / 6.0, *k4.dt);
    }
    if (out.has_kappa)
        out.kappa += h * (k1.dkappa + 2.0 * k2.dkappa + 2.0 * k3.dkappa + k4.dkappa) / 6.0;
    return out;
}

// Cash-Karp embedded RK45 pair.
struct Rk45Result {
    OdeState y5;
    double err = 0.0;
};

Rk45Result rk45_step(const OdeRhsKind& kind, const OdeState& y, double h,
                     bool normalize, double atol, double rtol) {
    static const double b21 = 0.2;
    static const double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    static const double b41 = 0.3, b42 = -0.9, b43 = 1.2;
    static const double b51 = -11.0 / 54.0, b52 = 2.5, b53 = -70.0 / 27.0, b54 = 35.0 / 27.0;
    static const double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0, b63 = 575.0 / 13824.0,
                        b64 = 44275.0 / 110592.0, b65 = 253.0 / 4096.0;
    static const double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                        c6 = 512.0 / 1771.0;
    static const double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                        d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0, d6 = c6 - 0.25;

    const OdeDeriv k1 = eval_rhs(kind, y, normalize);
    OdeState s2 = state_axpy(y, h * b21, k1);
    const OdeDeriv k2 = eval_rhs(kind, s2, normalize);
    OdeState s3 = state_axpy(state_axpy(y, h * b31, k1), h * b32, k2);
    const OdeDeriv k3 = eval_rhs(kind, s3, normalize);
    OdeState s4 = state_axpy(state_axpy(state_axpy(y, h * b41, k1), h * b42, k2), h * b43, k3);
    const OdeDeriv k4 = eval_rhs(kind, s4, normalize);
    OdeState s5 = state_axpy(state_axpy(state_axpy(state_axpy(y, h * b51, k1), h * b52, k2),
                                        h * b53, k3), h * b54, k4);
    const OdeDeriv k5 = eval_rhs(kind, s5, normalize);
    OdeState s6 = state_axpy(state_axpy(state_axpy(state_axpy(state_axpy(y, h * b61, k1),
                                        h * b62, k2), h * b63, k3), h * b64, k4), h * b65, k5);
    const OdeDeriv k6 = eval_rhs(kind, s6, normalize);

    Rk45Result out;
    out.y5 = y;
    out.y5.r.axpy(h * c1, k1.dr);
    out.y5.r.axpy(h * c3, k3.dr);
    out.y5.r.axpy(h * c4, k4.dr);
    out.y5.r.axpy(h * c6, k6.dr);
    if (out.y5.t) {
        out.y5.t->axpy(h * c1, *k1.dt);
        out.y5.t->axpy(h * c3, *k3.dt);
        out.y5.t->axpy(h * c4, *k4.dt);
        out.y5.t->axpy(h * c6, *k6.dt);
    }
    if (out.y5.has_kappa)
        out.y5.kappa += h * (c1 * k1.dkappa + c3 * k3.dkappa + c4 * k4.dkappa + c6 * k6.dkappa);

    CurvatureTensor err_r = k1.dr * (h * d1);
    err_r.axpy(h * d3, k3.dr);
    err_r.axpy(h * d4, k4.dr);
    err_r.axpy(h * d5, k5.dr);
    err_r.axpy(h * d6, k6.dr);
    const double scale_r = atol + rtol * y.r.frobenius();
    double err = err_r.frobenius() / scale_r;
    if (y.t) {
        CurvatureTensor err_t = *k1.dt * (h * d1);
        err_t.axpy(h * d3, *k3.dt);
        err_t.axpy(h * d4, *k4.dt);
        err_t.axpy(h * d5, *k5.dt);
        err_t.axpy(h * d6, *k6.dt);
        err = std::max(err, err_t.frobenius() / (atol + rtol * y.t->frobenius()));
    }
    if (y.has_kappa) {
        const double ek = h * (d1 * k1.dkappa + d3 * k3.dkappa + d4 * k4.dkappa
                               + d5 * k5.dkappa + d6 * k6.dkappa);
        err = std::max(err, std::abs(ek) / (atol + rtol * std::abs(y.kappa)));
    }
    out.err = err;
    return out;
}

struct MonitorContext {
    std::vector<MonitorSpec> specs;
    std::vector<std::string> names;          // expanded column names
    std::vector<Eigen::MatrixXd> warm;       // one warm frame per column
    int threads = 1;
    std::uint64_t seed = 1;
};

MonitorContext build_monitor_context(const std::vector<MonitorSpec>& specs,
                                     std::uint64_t seed, int threads) {
    MonitorContext ctx;
    ctx.specs = specs;
    ctx.threads = threads;
    ctx.seed = seed;
    for (const auto& s : specs) {
        if (s.kind == MonitorSpec::Kind::Eb) {
            ctx.names.push_back(s.name + "_i");
            ctx.names.push_back(s.name + "_ii");
            ctx.names.push_back(s.name + "_iii");
            ctx.names.push_back(s.name + "_iv");
        } else if (s.kind == MonitorSpec::Kind::G0) {
            ctx.names.push_back(s.name + "_i");
            ctx.names.push_back(s.name + "_ii");
            ctx.names.push_back(s.name + "_iii");
            ctx.names.push_back(s.name + "_iv");
        } else {
            ctx.names.push_back(s.name);
        }
    }
    ctx.warm.resize(ctx.names.size());
    return ctx;
}

void eval_monitors(MonitorContext& ctx, const OdeState& y, double t,
                   MonitorSample& sample, std::uint64_t step_seed) {
    sample.t = t;
    const SymmetricForm ric = ricci(y.r);
    sample.scal = ric.trace();
    sample.ric_norm_sq = ric.frobenius() * ric.frobenius();
    sample.margins.clear();
    int col = 0;
    const int n = y.r.n();
    for (const auto& spec : ctx.specs) {
        const auto warm_cfg = [&](int c) {
            FrameSearchConfig cfg = FrameSearchConfig::monitor(
                ctx.warm[c].size() ? &ctx.warm[c] : nullptr, 6);
            cfg.threads = ctx.threads;
            return cfg;
        };
        switch (spec.kind) {
            case MonitorSpec::Kind::Pic:
            case MonitorSpec::Kind::Pic1:
            case MonitorSpec::Kind::Pic2: {
                const IsoMode mode = spec.kind == MonitorSpec::Kind::Pic ? IsoMode::pic()
                                   : spec.kind == MonitorSpec::Kind::Pic1 ? IsoMode::pic1()
                                                                          : IsoMode::pic2();
                const ConeMarginReport rep =
                    min_iso(y.r, mode, warm_cfg(col), derive_seed(step_seed, col));
                ctx.warm[col] = rep.frame;
                sample.margins.push_back(rep.min_value);
                ++col;
                break;
            }
            case MonitorSpec::Kind::KappaShiftPic: {
                CurvatureTensor shifted = y.r;
                shifted.axpy(-0.5 * y.kappa, identity_wedge(n));
                const ConeMarginReport rep =
                    min_iso(shifted, IsoMode::pic(), warm_cfg(col), derive_seed(step_seed, col));
                ctx.warm[col] = rep.frame;
                sample.margins.push_back(rep.min_value);
                ++col;
                break;
            }
            case MonitorSpec::Kind::ShiftedPic: {
                CurvatureTensor shifted = y.r;
                shifted.axpy(-spec.pinching.theta * sample.scal, identity_wedge(n));
                const ConeMarginReport rep =
                    min_iso(shifted, IsoMode::pic(), warm_cfg(col), derive_seed(step_seed, col));
                ctx.warm[col] = rep.frame;
                sample.margins.push_back(rep.min_value);
                ++col;
                break;
            }
            case MonitorSpec::Kind::RicciPair: {
                sample.margins.push_back(ric.two_smallest_sum()
                                         - spec.pinching.theta * sample.scal
                                         + spec.pinching.n_const);
                ++col;
                break;
            }
            case MonitorSpec::Kind::Ft: {
                FrameSearchConfig cfg = warm_cfg(col);
                const FtResult res = check_Ft(y.r, spec.pinching, cfg,
                                              derive_seed(step_seed, col));
                ctx.warm[col] = res.report.frame;
                sample.margins.push_back(res.margin);
                ++col;
                break;
            }
            case MonitorSpec::Kind::G0: {
                FrameSearchConfig cfg = FrameSearchConfig::light(8);
                cfg.threads = ctx.threads;
                const G0Margins g = check_G0(y.r, spec.delta, t, spec.b_grid, cfg,
                                             derive_seed(step_seed, col));
                sample.margins.push_back(g.cond_i);
                sample.margins.push_back(g.cond_ii);
                sample.margins.push_back(g.cond_iii);
                sample.margins.push_back(g.cond_iv);
                col += 4;
                break;
            }
            case MonitorSpec::Kind::Eb: {
                if (!y.t) throw std::invalid_argument("Eb monitor requires a witness");
                FrameSearchConfig cfg = FrameSearchConfig::light(8);
                cfg.threads = ctx.threads;
                const EbMargins m = check_Eb(y.r, *y.t, spec.family, cfg,
                                             derive_seed(step_seed, col));
                sample.margins.push_back(m.psd_T);
                sample.margins.push_back(m.pic_S_minus_T);
                sample.margins.push_back(m.ricci_pair);
                sample.margins.push_back(m.scal_positive
                                             ? m.frame_iv
                                             : -std::numeric_limits<double>::infinity());
                col += 4;
                break;
            }
        }
    }
}

} // namespace

Trajectory integrate(const CurvatureTensor& r0, const OdeRhsKind& rhs,
                     const IntegratorConfig& cfg, const std::vector<MonitorSpec>& monitors,
                     const CurvatureTensor* t0, std::uint64_t seed, int threads) {
    if (!r0.entries().allFinite())
        throw std::invalid_argument("integrate: initial tensor not finite");
    if (rhs.tag == OdeRhsKind::Tag::TWitness && !t0)
        throw std::invalid_argument("integrate: TWitness requires an initial witness");

    OdeState y;
    y.r = r0;
    if (t0) y.t = *t0;
    for (const auto& m : monitors)
        if (m.kind == MonitorSpec::Kind::KappaShiftPic) {
            y.has_kappa = true;
            y.kappa = m.kappa0;
        }

    const double scal0 = scalar(r0);
    const double cap = cfg.scal_cap > 0.0 ? cfg.scal_cap
                                          : 1e6 * std::max(std::abs(scal0), 1.0);

    Trajectory traj;
    MonitorContext ctx = build_monitor_context(monitors, seed, threads);
    traj.monitor_names = ctx.names;

    const auto record = [&](const OdeState& s, double t, int step) {
        traj.times.push_back(t);
        traj.states.push_back(s.r);
        if (s.t) traj.witness_states.push_back(*s.t);
        MonitorSample sample;
        eval_monitors(ctx, s, t, sample, derive_seed(seed, 1000 + step));
        traj.monitors.push_back(std::move(sample));
    };

    record(y, 0.0, 0);

    double t = 0.0;
    double h = cfg.dt;
    int step = 0;
    traj.terminated = Termination::ReachedTEnd;

    while (t < cfg.t_end - 1e-15) {
        if (cfg.method == IntegratorConfig::Method::RK4Fixed) {
            const double hstep = std::min(h, cfg.t_end - t);
            OdeState next = rk4_step(rhs, y, hstep, cfg.normalize);
            ++step;
            if (!state_finite(next) || scalar(next.r) > cap) {
                traj.terminated = Termination::ScalCap;
                break;
            }
            y = std::move(next);
            t += hstep;
        } else {
            double hstep = std::min(h, cfg.t_end - t);
            bool accepted = false;
            while (!accepted) {
                Rk45Result res = rk45_step(rhs, y, hstep, cfg.normalize, cfg.atol, cfg.rtol);
                ++step;
                const bool finite = state_finite(res.y5);
                if (finite && res.err <= 1.0) {
                    y = std::move(res.y5);
                    t += hstep;
                    const double grow = finite && res.err > 1e-12
                                            ? 0.9 * std::pow(res.err, -0.2)
                                            : 5.0;
                    h = std::min(cfg.dt_max, hstep * std::min(5.0, std::max(0.2, grow)));
                    accepted = true;
                } else {
                    const double shrink = finite ? std::max(0.1, 0.9 * std::pow(res.err, -0.25))
                                                 : 0.1;
                    hstep *= shrink;
                    if (hstep < cfg.dt_min) {
                        traj.terminated = Termination::StepUnderflow;
                        break;
                    }
                }
            }
            if (traj.terminated == Termination::StepUnderflow) break;
            if (scalar(y.r) > cap) {
                record(y, t, step);
                traj.terminated = Termination::ScalCap;
                traj.steps_taken = step;
                return traj;
            }
        }
        if (step % std::max(cfg.monitor_every, 1) == 0 || t >= cfg.t_end - 1e-15)
            record(y, t, step);
    }
    // Record the last good state when the loop ended between samples.
    if (traj.times.back() < t - 1e-15) record(y, t, step);
    traj.steps_taken = step;
    return traj;
}

ViolationReport scan_monitors(const Trajectory& traj, double tol) {
    ViolationReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.monitors) {
        for (std::size_t c = 0; c < s.margins.size(); ++c) {
            const double m = s.margins[c];
            if (m < rep.worst_margin) {
                rep.worst_margin = m;
                rep.worst_monitor = traj.monitor_names[c];
            }
            if (rep.clean && m < -tol) {
                rep.clean = false;
                rep.first_violation_time = s.t;
                rep.monitor = traj.monitor_names[c];
                rep.margin = m;
            }
        }
    }
    return rep;
}

Trajectory coupled_Eb_run(const CurvatureTensor& s0, const CurvatureTensor& t0,
                          const FamilyParams& params, double epsilon,
                          const IntegratorConfig& cfg, std::uint64_t seed, int threads) {
    MonitorSpec eb = MonitorSpec::simple(MonitorSpec::Kind::Eb);
    eb.family = params;
    const OdeRhsKind rhs = OdeRhsKind::t_witness(params.a, params.b, epsilon);
    return integrate(s0, rhs, cfg, {eb}, &t0, seed, threads);
}

EpsilonEstimate estimate_epsilon(const FamilyParams& params, int samples,
                                 std::uint64_t seed, int threads) {
    if (params.family != ConeFamily::C)
        throw std::invalid_argument("estimate_epsilon: family C parameters required");
    const int n = params.n;
    EpsilonEstimate est;
    est.samples = samples;
    est.worst_ratio = std::numeric_limits<double>::infinity();

    std::vector<double> ratios(samples);
    parallel_for(samples, threads, [&](std::size_t i) {
        const std::uint64_t s = derive_seed(seed, i);
        ConeSampleOptions opt;
        opt.target_margin = 0.02;
        opt.restarts = 8;
        CurvatureTensor sample = random_in_cone(n, ConeKind::Pic, s, opt);
        // Enforce the E(b) Ricci-pair condition by blending toward the sphere.
        const CurvatureTensor sph = sphere_tensor(n, 1.0);
        for (int guard = 0; guard < 40; ++guard) {
            const SymmetricForm ric = ricci(sample);
            if (ric.two_smallest_sum() + 2.0 * params.gamma / n * ric.trace() >= 0.0) break;
            sample.axpy(0.25, sph);
        }
        const double sc = scalar(sample);
        const CurvatureTensor d = d_ab(sample, params.a, params.b);
        FrameSearchConfig cfg = FrameSearchConfig::light(12);
        const double m = min_iso(d, IsoMode::pic(), cfg, derive_seed(s, 3)).min_value;
        ratios[i] = m / (8.0 * sc * sc);
    });
    for (double r : ratios) est.worst_ratio = std::min(est.worst_ratio, r);
    est.positive = est.worst_ratio > 0.0;
    est.epsilon = est.positive ? 0.5 * est.worst_ratio : 0.0;
    return est;
}

std::string Trajectory::to_csv() const {
    std::ostringstream os;
    os << "t,scal,ric_norm_sq";
    for (const auto& name : monitor_names) os << ",margin_" << name;
    os << '\n';
    char buf[64];
    const auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    for (const auto& s : monitors) {
        put(s.t);
        os << ',';
        put(s.scal);
        os << ',';
        put(s.ric_norm_sq);
        for (double m : s.margins) {
            os << ',';
            put(m);
        }
        os << '\n';
    }
    return os.str();
}

} // namespace curvcone
