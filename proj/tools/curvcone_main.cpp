// curvcone: tensor construction and inspection, cone queries, Hamilton-ODE
// runs, lemma verification, and parameter scans.
//
// Exit codes: 0 ok, 1 internal failure, 2 malformed input, 3 violation or
// lemma failure, 4 inconclusive, 5 scal-cap or step-underflow termination.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "curvcone/cones.hpp"
#include "curvcone/ode.hpp"
#include "curvcone/parallel.hpp"
#include "curvcone/verify.hpp"

namespace {

using namespace curvcone;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitViolation = 3;
constexpr int kExitInconclusive = 4;
constexpr int kExitTerminated = 5;

struct GlobalOpts {
    std::uint64_t seed = 1;
    int threads = 0; // 0: auto
    std::string output;
    std::string format = "human";
};

std::uint64_t resolve_seed(std::uint64_t flag_seed) {
    if (const char* env = std::getenv("CURVCONE_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw std::invalid_argument("CURVCONE_SEED is not an integer");
        }
    }
    return flag_seed;
}

void write_output(const GlobalOpts& g, const std::string& text) {
    if (g.output.empty() || g.output == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(g.output);
    if (!f) throw std::runtime_error("cannot open output " + g.output);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

void log_config(const std::string& cmd, std::uint64_t seed, int threads) {
    std::fprintf(stderr, "[curvcone] %s seed=%llu threads=%d\n", cmd.c_str(),
                 static_cast<unsigned long long>(seed), resolve_threads(threads));
}

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dots = item.find("..");
        if (dots != std::string::npos) {
            const int lo = std::stoi(item.substr(0, dots));
            const int hi = std::stoi(item.substr(dots + 2));
            for (int n = lo; n <= hi; ++n) out.push_back(n);
        } else if (!item.empty()) {
            out.push_back(std::stoi(item));
        }
    }
    return out;
}

PinchingFunctions make_pinching(const std::string& f_expr, const std::string& g_expr,
                                double theta, double n_const) {
    PinchingFunctions pf;
    pf.f = parse_pinching_expr(f_expr.empty() ? "0" : f_expr);
    pf.g = parse_pinching_expr(g_expr.empty() ? "0" : g_expr);
    pf.theta = theta;
    pf.n_const = n_const;
    return pf;
}

// ---------------------------------------------------------------------------

int cmd_tensor_make(const GlobalOpts& g, const std::string& kind, int n,
                    double kappa, std::uint64_t seed) {
    if (kind == "random" && n < 4) {
        std::fprintf(stderr, "error: random tensors target the cone oracles, need n >= 4\n");
        return kExitBadInput;
    }
    CurvatureTensor r(std::max(n, 2));
    if (kind == "sphere") r = sphere_tensor(n, kappa);
    else if (kind == "cylinder") r = cylinder_tensor(n, kappa);
    else if (kind == "id-wedge") r = identity_wedge(n);
    else if (kind == "random") r = random_gaussian(n, seed);
    else {
        std::fprintf(stderr, "error: unknown kind %s\n", kind.c_str());
        return kExitBadInput;
    }
    write_output(g, tensor_to_json(r));
    return kExitOk;
}

int cmd_tensor_info(const GlobalOpts& g, const std::string& path, int restarts,
                    std::uint64_t seed, int threads) {
    const CurvatureTensor r = load_tensor(path);
    const SymmetricForm ric = ricci(r);
    std::ostringstream os;
    os << "n: " << r.n() << '\n';
    os << "scal: " << ric.trace() << '\n';
    os << "frobenius: " << r.frobenius() << '\n';
    os << "bianchi_defect: " << r.bianchi_defect() << '\n';
    os << "ricci_eigenvalues:";
    const Eigen::VectorXd ev = ric.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) os << ' ' << ev(i);
    os << '\n';
    if (r.n() >= 4) {
        FrameSearchConfig cfg = FrameSearchConfig::full(restarts);
        cfg.threads = threads;
        const ConeSummary s = cone_summary(r, cfg, seed);
        os << "pic_margin: " << s.pic << '\n';
        os << "pic1_margin: " << s.pic1 << '\n';
        os << "pic2_margin: " << s.pic2 << '\n';
    } else {
        os << "warning: cone margins undefined below n = 4\n";
    }
    write_output(g, os.str());
    return kExitOk;
}

int cmd_cone_check(const GlobalOpts& g, const std::string& path, const std::string& mode,
                   double tol, int restarts, std::uint64_t seed, int threads,
                   const std::string& f_expr, const std::string& g_expr, double theta,
                   double n_const, double delta, double t_now, int b_grid) {
    const CurvatureTensor r = load_tensor(path);
    if (r.n() < 4) {
        std::fprintf(stderr, "error: cone checks need n >= 4\n");
        return kExitBadInput;
    }
    FrameSearchConfig cfg = FrameSearchConfig::full(restarts);
    cfg.threads = threads;

    double margin = 0.0;
    bool converged = true;
    std::string payload;
    if (mode == "pic" || mode == "pic1" || mode == "pic2") {
        const ConeMarginReport rep = min_iso(r, IsoMode::from_name(mode), cfg, seed);
        margin = rep.min_value;
        converged = rep.converged;
        payload = rep.to_json();
    } else if (mode == "shifted") {
        const PinchingFunctions pf = make_pinching(f_expr, g_expr, theta, n_const);
        const ShiftedMargins sm = shifted_predicates(r, pf, cfg, seed);
        margin = std::min(std::min(sm.pic_shift, sm.pic2_shift), sm.ricci_pair);
        nlohmann::json j = {{"pic_shift", sm.pic_shift},
                            {"pic2_shift", sm.pic2_shift},
                            {"ricci_pair", sm.ricci_pair}};
        payload = j.dump(2);
    } else if (mode == "g0") {
        const G0Margins gm = check_G0(r, delta, t_now, b_grid, cfg, seed);
        margin = gm.worst();
        converged = gm.iv_converged;
        nlohmann::json j = {{"i", gm.cond_i}, {"ii", gm.cond_ii},
                            {"iii", gm.cond_iii}, {"iv", gm.cond_iv}};
        payload = j.dump(2);
    } else if (mode == "ft") {
        const PinchingFunctions pf = make_pinching(f_expr, g_expr, theta, n_const);
        const FtResult res = check_Ft(r, pf, cfg, seed);
        margin = res.margin;
        converged = res.report.converged;
        payload = res.report.to_json();
    } else {
        std::fprintf(stderr, "error: unknown mode %s\n", mode.c_str());
        return kExitBadInput;
    }
    write_output(g, payload);
    if (margin < -tol) return kExitViolation; // a found violation is conclusive
    if (!converged) return kExitInconclusive;
    return kExitOk;
}

int cmd_evolve(const GlobalOpts& g, const std::string& path, const std::string& rhs_name,
               double a, double b, double epsilon, double dt, double t_end, bool normalize,
               const std::string& method, const std::string& monitors_text,
               const std::string& witness_path, int monitor_every, double scal_cap,
               double tol, std::uint64_t seed, int threads, double kappa0,
               const std::string& snapshot_dir, int snapshot_stride) {
    const CurvatureTensor r0 = load_tensor(path);

    OdeRhsKind kind = OdeRhsKind::plain_q();
    CurvatureTensor witness;
    bool has_witness = false;
    if (rhs_name == "q") {
        kind = OdeRhsKind::plain_q();
    } else if (rhs_name == "q-dab") {
        kind = OdeRhsKind::q_plus_dab(a, b);
    } else if (rhs_name == "coupled") {
        kind = OdeRhsKind::t_witness(a, b, epsilon);
        if (witness_path.empty()) {
            std::fprintf(stderr, "error: coupled rhs needs --witness\n");
            return kExitBadInput;
        }
        witness = load_tensor(witness_path);
        has_witness = true;
    } else {
        std::fprintf(stderr, "error: unknown rhs %s\n", rhs_name.c_str());
        return kExitBadInput;
    }

    IntegratorConfig cfg = method == "rk45" ? IntegratorConfig::rk45(t_end)
                                            : IntegratorConfig::rk4(dt, t_end);
    cfg.dt = dt;
    cfg.normalize = normalize;
    cfg.monitor_every = monitor_every;
    cfg.scal_cap = scal_cap;

    std::vector<MonitorSpec> specs;
    std::stringstream ss(monitors_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        MonitorSpec spec = MonitorSpec::from_name(item);
        if (spec.kind == MonitorSpec::Kind::KappaShiftPic) spec.kappa0 = kappa0;
        specs.push_back(std::move(spec));
    }

    const Trajectory traj = integrate(r0, kind, cfg, specs,
                                      has_witness ? &witness : nullptr, seed, threads);
    std::string csv = traj.to_csv();
    csv += std::string("# terminated: ") + termination_name(traj.terminated) + "\n";
    write_output(g, csv);

    if (!snapshot_dir.empty()) {
        for (std::size_t i = 0; i < traj.states.size();
             i += static_cast<std::size_t>(std::max(snapshot_stride, 1))) {
            char name[64];
            std::snprintf(name, sizeof(name), "/state_%05zu.json", i);
            save_tensor(traj.states[i], snapshot_dir + name);
        }
    }

    const ViolationReport rep = scan_monitors(traj, tol);
    if (!rep.clean) {
        std::fprintf(stderr, "monitor %s violated at t=%g (margin %g)\n",
                     rep.monitor.c_str(), rep.first_violation_time, rep.margin);
        return kExitViolation;
    }
    if (traj.terminated != Termination::ReachedTEnd) return kExitTerminated;
    return kExitOk;
}

int cmd_verify(const GlobalOpts& g, const std::string& which, const std::string& n_list_text,
               int trials, int b_grid, std::uint64_t seed, int threads,
               const std::string& junit_path) {
    VerifyConfig cfg = VerifyConfig::defaults();
    if (!n_list_text.empty()) {
        cfg.n_list = parse_n_list(n_list_text);
        std::vector<int> small;
        for (int n : cfg.n_list)
            if (n >= 5 && (small.empty() || small.back() != n)) small.push_back(n);
        if (!small.empty() && which != "all") cfg.n_list_small = small;
    }
    cfg.trials = trials;
    cfg.b_grid = b_grid;
    cfg.seed = seed;
    cfg.threads = resolve_threads(threads);

    std::vector<LemmaReport> reports;
    const int n0 = cfg.n_list.empty() ? 12 : cfg.n_list.front();
    if (which == "params1") reports.push_back(verify_parameters1(cfg.n_list, cfg.b_grid));
    else if (which == "params2") reports.push_back(verify_parameters2(cfg.n_list));
    else if (which == "params3") reports.push_back(verify_parameters3(cfg.n_list, cfg.b_grid));
    else if (which == "quadratic")
        reports.push_back(verify_quadratic_inequality(n0, b_max_for(n0), 400, 4));
    else if (which == "algfact")
        for (double zeta : {0.0, 0.5, 1.0})
            reports.push_back(verify_algebraic_fact(n0, zeta, 1.0, cfg.trials,
                                                    derive_seed(cfg.seed, 17)));
    else if (which == "appendixA")
        reports.push_back(verify_appendixA_small(cfg.trials, derive_seed(cfg.seed, 1),
                                                 cfg.n_list_small, cfg.threads));
    else if (which == "pic-to-pic1")
        for (int n : cfg.n_list_small)
            reports.push_back(verify_pic_to_pic1(n, cfg.trials, derive_seed(cfg.seed, 2),
                                                 cfg.threads));
    else if (which == "extension")
        for (int n : cfg.n_list_small)
            reports.push_back(verify_extension(n, cfg.trials, derive_seed(cfg.seed, 3),
                                               cfg.threads));
    else if (which == "interpolation")
        for (int n : cfg.n_list_small)
            reports.push_back(verify_interpolation(n, cfg.trials, derive_seed(cfg.seed, 4),
                                                   cfg.threads));
    else if (which == "sharp")
        for (int n : cfg.n_list_small)
            reports.push_back(verify_sharp_tangent(n, cfg.trials, derive_seed(cfg.seed, 5),
                                                   cfg.threads));
    else if (which == "surgery")
        reports.push_back(verify_surgery_transform(n0, {0.01, 0.02, 0.05}, 0.0,
                                                   derive_seed(cfg.seed, 6)));
    else if (which == "all") reports = verify_all(cfg);
    else {
        std::fprintf(stderr, "error: unknown verifier %s\n", which.c_str());
        return kExitBadInput;
    }

    write_output(g, certificates_json(reports));
    if (!junit_path.empty()) {
        std::ofstream f(junit_path);
        f << junit_xml(reports);
    }
    for (const auto& r : reports) {
        const std::string suffix = r.note.empty() ? "" : "  (" + r.note + ")";
        std::fprintf(stderr, "[%s] %s worst_margin=%g%s\n", r.passed ? "PASS" : "FAIL",
                     r.lemma_id.c_str(), r.worst_margin, suffix.c_str());
    }

    bool margin_failure = false, any_failure = false;
    for (const auto& r : reports) {
        if (!r.passed) {
            any_failure = true;
            if (r.worst_margin < -r.tol) margin_failure = true;
        }
    }
    if (margin_failure) return kExitViolation;
    if (any_failure) return kExitInconclusive;
    return kExitOk;
}

int cmd_scan(const GlobalOpts& g, const std::string& family_name, int n, int b_grid) {
    if (b_grid <= 0) {
        std::fprintf(stderr, "error: --b-grid must be positive\n");
        return kExitBadInput;
    }
    ConeFamily family;
    if (family_name == "c") family = ConeFamily::C;
    else if (family_name == "ctilde") family = ConeFamily::Ctilde;
    else {
        std::fprintf(stderr, "error: unknown family %s\n", family_name.c_str());
        return kExitBadInput;
    }
    const double top = family == ConeFamily::C ? b_max_for(n) : btilde_max_for(n);
    std::ostringstream os;
    os << "b,a,gamma,omega,zeta\n";
    char buf[64];
    const auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    for (int j = 1; j <= b_grid; ++j) {
        const double b = top * j / b_grid;
        const FamilyParams p = family_params(n, b, family);
        // Per-row invariant: the derived quantities recompute consistently.
        if (family == ConeFamily::C) {
            const double u = 2.0 + (n - 2.0) * b;
            const double v = 2.0 + (n - 3.0) * b;
            if (std::abs(p.a - u * u / (2.0 * v) * b) > 1e-14 * std::max(1.0, p.a))
                throw std::runtime_error("scan: family invariant violated");
        } else if (std::abs(2.0 * p.a - 2.0 * b - (n - 2.0) * b * b) > 1e-14)
            throw std::runtime_error("scan: family invariant violated");
        put(b); os << ',';
        put(p.a); os << ',';
        put(p.gamma); os << ',';
        put(p.omega); os << ',';
        put(p.zeta); os << '\n';
    }
    write_output(g, os.str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"algebraic curvature-tensor cone calculus"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    std::uint64_t flag_seed = 1;
    int threads = 0;
    app.add_option("--seed", flag_seed, "master RNG seed (CURVCONE_SEED overrides)");
    app.add_option("--threads", threads, "worker threads (0 = auto)");
    app.add_option("--out", g.output, "output path (default stdout)");
    app.add_option("--format", g.format, "human|json|csv");

    // tensor
    auto* tensor = app.add_subcommand("tensor", "construct and inspect tensors");
    tensor->fallthrough();
    auto* make = tensor->add_subcommand("make", "write a tensor as JSON");
    make->fallthrough();
    std::string make_kind = "sphere";
    int make_n = 12;
    double make_kappa = 1.0;
    make->add_option("--kind", make_kind, "sphere|cylinder|random|id-wedge")->required();
    make->add_option("--n", make_n, "dimension")->required();
    make->add_option("--kappa", make_kappa, "curvature scale for sphere/cylinder");
    auto* info = tensor->add_subcommand("info", "print invariants and cone margins");
    info->fallthrough();
    std::string info_path;
    int info_restarts = 64;
    info->add_option("file", info_path, "tensor JSON")->required();
    info->add_option("--restarts", info_restarts, "multistart count");

    // cone
    auto* cone = app.add_subcommand("cone", "cone membership queries");
    cone->fallthrough();
    auto* check = cone->add_subcommand("check", "margin of a tensor file");
    check->fallthrough();
    std::string check_path, check_mode = "pic", f_expr, g_expr;
    double theta = 0.0, n_const = 0.0, delta = 1e-3, t_now = 0.0, tol = 1e-7;
    int check_restarts = 64, b_grid_cone = 5;
    check->add_option("file", check_path)->required();
    check->add_option("--mode", check_mode, "pic|pic1|pic2|shifted|g0|ft")->required();
    check->add_option("--theta", theta);
    check->add_option("--f", f_expr, "pinching f: c | c*sqrt | c*log1p | c*pow:p");
    check->add_option("--g", g_expr, "pinching g (same grammar)");
    check->add_option("--n-const", n_const, "additive constant N");
    check->add_option("--delta", delta);
    check->add_option("--t", t_now);
    check->add_option("--b-grid", b_grid_cone);
    check->add_option("--restarts", check_restarts);
    check->add_option("--tol", tol);

    // evolve
    auto* evolve = app.add_subcommand("evolve", "integrate the Hamilton ODE");
    evolve->fallthrough();
    std::string evolve_path, rhs_name = "q", method = "rk4", monitors_text, witness_path;
    std::string snapshot_dir;
    double ev_a = 0.0, ev_b = 0.0, ev_eps = 0.0, ev_dt = 1e-4, ev_tend = 0.01;
    double ev_cap = 0.0, ev_tol = 1e-7, kappa0 = 0.0;
    bool ev_norm = false;
    int monitor_every = 10, snapshot_stride = 10;
    evolve->add_option("file", evolve_path)->required();
    evolve->add_option("--rhs", rhs_name, "q|q-dab|coupled");
    evolve->add_option("--a", ev_a);
    evolve->add_option("--b", ev_b);
    evolve->add_option("--epsilon", ev_eps);
    evolve->add_option("--dt", ev_dt);
    evolve->add_option("--t-end", ev_tend);
    evolve->add_option("--method", method, "rk4|rk45");
    evolve->add_flag("--normalize", ev_norm);
    evolve->add_option("--monitors", monitors_text,
                       "pic,pic1,pic2,kappa-pic,g0,ft,shifted-pic,ricci-pair");
    evolve->add_option("--witness", witness_path, "initial witness for coupled runs");
    evolve->add_option("--monitor-every", monitor_every);
    evolve->add_option("--scal-cap", ev_cap);
    evolve->add_option("--tol", ev_tol);
    evolve->add_option("--kappa0", kappa0);
    evolve->add_option("--snapshots", snapshot_dir);
    evolve->add_option("--snapshot-stride", snapshot_stride);

    // verify
    auto* verify = app.add_subcommand("verify", "lemma certification");
    verify->fallthrough();
    std::string verify_which, n_list_text, junit_path;
    int trials = 100, b_grid = 10000;
    verify->add_option("which", verify_which,
                       "params1|params2|params3|quadratic|algfact|appendixA|"
                       "pic-to-pic1|extension|interpolation|sharp|surgery|all")
        ->required();
    verify->add_option("--n-list", n_list_text, "e.g. 12,13 or 12..64");
    verify->add_option("--trials", trials);
    verify->add_option("--b-grid", b_grid);
    verify->add_option("--junit", junit_path);

    // scan
    auto* scan = app.add_subcommand("scan", "parameter-map scans");
    scan->fallthrough();
    auto* scan_params = scan->add_subcommand("params", "family parameter table");
    scan_params->fallthrough();
    std::string scan_family = "c";
    int scan_n = 12, scan_grid = 100;
    scan_params->add_option("--family", scan_family, "c|ctilde")->required();
    scan_params->add_option("--n", scan_n)->required();
    scan_params->add_option("--b-grid", scan_grid)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        const std::uint64_t seed = resolve_seed(flag_seed);
        g.seed = seed;
        g.threads = threads;
        const int nthreads = resolve_threads(threads);
        if (make->parsed()) {
            log_config("tensor make", seed, threads);
            return cmd_tensor_make(g, make_kind, make_n, make_kappa, seed);
        }
        if (info->parsed()) {
            log_config("tensor info", seed, threads);
            return cmd_tensor_info(g, info_path, info_restarts, seed, nthreads);
        }
        if (check->parsed()) {
            log_config("cone check", seed, threads);
            return cmd_cone_check(g, check_path, check_mode, tol, check_restarts, seed,
                                  nthreads, f_expr, g_expr, theta, n_const, delta, t_now,
                                  b_grid_cone);
        }
        if (evolve->parsed()) {
            log_config("evolve", seed, threads);
            return cmd_evolve(g, evolve_path, rhs_name, ev_a, ev_b, ev_eps, ev_dt, ev_tend,
                              ev_norm, method, monitors_text, witness_path, monitor_every,
                              ev_cap, ev_tol, seed, nthreads, kappa0, snapshot_dir,
                              snapshot_stride);
        }
        if (verify->parsed()) {
            log_config("verify " + verify_which, seed, threads);
            return cmd_verify(g, verify_which, n_list_text, trials, b_grid, seed, threads,
                              junit_path);
        }
        if (scan_params->parsed()) {
            log_config("scan params", seed, threads);
            return cmd_scan(g, scan_family, scan_n, scan_grid);
        }
        std::fprintf(stderr, "error: no subcommand\n");
        return kExitBadInput;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
}
