// Command line front end: experiments, invariant suites, reports.
//
// Exit codes: 0 success, 1 internal error, 2 config/usage error,
// 3 certificate failure.

#include <CLI11.hpp>

#include <metvol/cocycles.hpp>
#include <metvol/config.hpp>
#include <metvol/verify.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace metvol;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCertificate = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int n = 0;
    int q_max = 0;
    double tol = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config) {
    auto* copt = cmd->add_option("--config", args.config_path, "experiment config JSON");
    if (needs_config) copt->required();
    cmd->add_option("--out", args.out_dir, "output directory for reports");
    cmd->add_option("--seed", args.seed, "seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--n", args.n, "trajectory length override");
    cmd->add_option("--qmax", args.q_max, "q_max override");
    cmd->add_option("--tol", args.tol, "eps_opt override");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = load_config(args.config_path);
    if (args.seed_set) {
        cfg.seed = args.seed;
        cfg.cocycle.seed = args.seed;
    }
    if (args.n > 0) cfg.N = args.n;
    if (args.q_max > 0) cfg.q_max = args.q_max;
    if (args.tol > 0.0) cfg.tolerances.eps_opt = args.tol;
    return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
    if (args.out_dir.empty()) return name;
    std::filesystem::create_directories(args.out_dir);
    return (std::filesystem::path(args.out_dir) / name).string();
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_ledger_csv(const std::string& path, const GrowthLedger& ledger) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "n";
    for (std::size_t q = 1; q <= ledger.channels.size(); ++q) out << ",running_l" << q;
    out << "\n";
    std::vector<double> cum(ledger.channels.size(), 0.0);
    for (int n = 1; n <= ledger.n; ++n) {
        out << n;
        for (std::size_t q = 0; q < ledger.channels.size(); ++q) {
            const auto& inc = ledger.channels[q].increments;
            if (n - 1 < static_cast<int>(inc.size())) {
                cum[q] += inc[n - 1];
                out << "," << cum[q] / n;
            } else {
                out << ",-inf";
            }
        }
        out << "\n";
    }
}

int run_exponents(const CommonArgs& args) {
    ExperimentConfig cfg = resolve_config(args);
    Trajectory traj = stream(cfg.cocycle, cfg.N);
    GrowthLedger ledger =
        growth_rates(traj, cfg.q_max, cfg.N, {}, cfg.seed, cfg.tolerances);
    ExponentReport rep =
        exponent_spectrum(ledger.rates(), ledger.noise_estimate(), cfg.tolerances);

    std::cout << "exponents (N=" << cfg.N << ", q_max=" << cfg.q_max << ")\n";
    for (std::size_t i = 0; i < rep.lambda.size(); ++i)
        std::cout << "  lambda_" << i + 1 << " = " << rep.lambda[i]
                  << "  (multiplicity " << rep.mult[i] << ")\n";

    Json report;
    report["command"] = "exponents";
    report["config"] = to_json(cfg);
    report["exponents"] = to_json(rep);
    write_json(out_path(args, cfg.report_path), report);
    write_ledger_csv(out_path(args, cfg.ledger_path), ledger);
    return kExitOk;
}

int run_filtration(const CommonArgs& args) {
    ExperimentConfig cfg = resolve_config(args);
    Trajectory traj = stream(cfg.cocycle, cfg.N);
    FiltrationResult f = filtration(traj, cfg.N, cfg.seed, {}, cfg.tolerances);

    std::cout << "filtration levels: " << f.filtration.subspaces.size() << "\n";
    for (std::size_t i = 0; i < f.filtration.codims.size(); ++i)
        std::cout << "  level " << i + 2 << ": codim " << f.filtration.codims[i] << "\n";

    Json report;
    report["command"] = "filtration";
    report["config"] = to_json(cfg);
    report["exponents"] = to_json(f.report);
    report["filtration"] = to_json(f.filtration);
    report["level_residuals"] = f.level_residuals;
    write_json(out_path(args, cfg.report_path), report);
    write_ledger_csv(out_path(args, cfg.ledger_path), f.ledger);

    std::ofstream cauchy(out_path(args, cfg.cauchy_path));
    cauchy << "level,n,d_h\n";
    for (std::size_t lvl = 0; lvl < f.filtration.cauchy_log.size(); ++lvl)
        for (std::size_t i = 0; i < f.filtration.cauchy_log[lvl].size(); ++i)
            cauchy << lvl + 2 << "," << i + 1 << "," << f.filtration.cauchy_log[lvl][i]
                   << "\n";
    return kExitOk;
}

int run_spectral(const CommonArgs& args) {
    ExperimentConfig cfg = resolve_config(args);
    Trajectory traj = stream(cfg.cocycle, cfg.N);
    OperatorMatrix A = traj.op(0);  // profile of the stream's first operator
    const int qm = std::min(cfg.q_max, cfg.space.dim);
    SingularProfile p = singular_profile(cfg.space, A, qm, {}, cfg.seed, cfg.tolerances);

    std::cout << "q, V_q, c_q, V_q/(c_q V_{q-1})\n";
    double prev_v = 1.0;
    for (int q = 1; q <= qm; ++q) {
        const double vq = p.vq.count(q) ? p.vq.at(q) : 0.0;
        const double cq = p.cq.count(q) ? p.cq.at(q) : 0.0;
        const double ratio = (q > 1 && cq > 0 && prev_v > 0) ? vq / (cq * prev_v) : 1.0;
        std::cout << q << ", " << vq << ", " << cq << ", " << ratio << "\n";
        prev_v = vq;
    }
    Json report;
    report["command"] = "spectral";
    report["config"] = to_json(cfg);
    report["profile"] = to_json(p);
    write_json(out_path(args, cfg.report_path), report);
    return kExitOk;
}

int run_geometry(const CommonArgs& args) {
    ExperimentConfig cfg = resolve_config(args);
    const int d = cfg.space.dim;
    RngStream rng(cfg.seed, 0x6e0);
    const int q = std::max(1, std::min(cfg.q_max, d - 1));
    Subspace U = random_subspace(d, q, rng);
    Subspace V = random_subspace(d, q, rng);

    AngleResult uv = min_angle(cfg.space, U, V, {}, cfg.seed, cfg.tolerances);
    AngleResult vu = min_angle(cfg.space, V, U, {}, cfg.seed + 1, cfg.tolerances);
    const double guv = gap(cfg.space, U, V, {}, cfg.seed + 2);
    const double gvu = gap(cfg.space, V, U, {}, cfg.seed + 3);
    const double dh = hausdorff(cfg.space, U, V, {}, cfg.seed + 4);
    Splitting comp = auerbach_complement(cfg.space, U, {}, cfg.seed + 5, cfg.tolerances);

    std::cout << "seeded subspace pair (d=" << d << ", q=" << q << ")\n"
              << "  sin theta(U,V) = " << uv.sin_theta << "\n"
              << "  sin theta(V,U) = " << vu.sin_theta << "\n"
              << "  gap(U,V) = " << guv << ", gap(V,U) = " << gvu << "\n"
              << "  d_H(U,V) = " << dh << "\n"
              << "  |pi| of the complement of U = " << comp.proj_norm << "\n";

    Json report;
    report["command"] = "geometry";
    report["config"] = to_json(cfg);
    report["results"] = Json{{"sin_theta_uv", uv.sin_theta},
                             {"sin_theta_vu", vu.sin_theta},
                             {"gap_uv", guv},
                             {"gap_vu", gvu},
                             {"hausdorff", dh},
                             {"auerbach_proj_norm", comp.proj_norm},
                             {"U", to_json(U)},
                             {"V", to_json(V)}};
    write_json(out_path(args, cfg.report_path), report);
    return kExitOk;
}

int run_sublevel(const CommonArgs& args) {
    ExperimentConfig cfg = resolve_config(args);
    Trajectory traj = stream(cfg.cocycle, cfg.N);
    GrowthLedger ledger = growth_rates(traj, std::min(cfg.q_max, cfg.space.dim),
                                       std::min(cfg.N, 1500), {}, cfg.seed,
                                       cfg.tolerances);
    ExponentReport rep =
        exponent_spectrum(ledger.rates(), ledger.noise_estimate(), cfg.tolerances);
    if (rep.lambda.size() < 2) {
        std::cerr << "sublevel requires a spectral gap after the first exponent\n";
        return kExitCertificate;
    }
    const int m1 = rep.mult[0];
    SlowSubspaceResult slow =
        slow_subspace(traj, m1, std::min(cfg.N, 120), cfg.delta, cfg.seed, cfg.tolerances);
    const double lambda2 = rep.lambda[1] == -kInf ? rep.lambda[0] - 3.0 : rep.lambda[1];
    const double delta = cfg.delta > 0 ? cfg.delta : (rep.lambda[0] - lambda2) / 10.0;
    SublevelResult r = sublevel_convergence(traj, slow.F_hat, lambda2, delta, cfg.N,
                                            cfg.seed, cfg.tolerances);

    std::cout << "sublevel d_H sequence (" << r.ns.size() << " points), final "
              << r.final_value << "\n";
    std::ofstream csv(out_path(args, cfg.cauchy_path));
    csv << "n,d_h\n";
    for (std::size_t i = 0; i < r.ns.size(); ++i)
        csv << r.ns[i] << "," << r.d_h[i] << "\n";

    Json report;
    report["command"] = "sublevel";
    report["config"] = to_json(cfg);
    report["lambda2"] = lambda2;
    report["delta"] = delta;
    report["ns"] = r.ns;
    report["d_h"] = r.d_h;
    report["final"] = r.final_value;
    write_json(out_path(args, cfg.report_path), report);
    return kExitOk;
}

int run_verify(const CommonArgs& args, const std::string& suite, const std::string& scale) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = resolve_config(args);
    const std::uint64_t seed = args.seed_set ? args.seed : cfg.seed;

    VerifyCounts counts;  // CLI defaults: quick sweep sizes
    if (scale == "full") counts = VerifyCounts::full_scale();
    else if (scale != "quick") {
        std::cerr << "unknown scale: " << scale << " (expected quick|full)\n";
        return kExitConfig;
    }
    std::vector<SuiteResult> results;
    if (suite == "geometry" || suite == "all")
        results.push_back(verify_geometry(seed, counts));
    if (suite == "volume" || suite == "all") results.push_back(verify_volume(seed, counts));
    if (suite == "spectral" || suite == "all")
        results.push_back(verify_spectral(seed, counts));
    if (suite == "met" || suite == "all") results.push_back(verify_met(seed, counts));
    if (results.empty()) {
        std::cerr << "unknown suite: " << suite
                  << " (expected geometry|volume|spectral|met|all)\n";
        return kExitConfig;
    }

    bool all_pass = true;
    Json suites = Json::array();
    for (const auto& r : results) {
        std::cout << "suite " << r.suite << "\n";
        for (const auto& c : r.certificates) {
            std::cout << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.id << ": "
                      << c.violations << "/" << c.count << " violations\n";
            all_pass &= c.pass;
        }
        suites.push_back(to_json(r));
    }
    Json report;
    report["command"] = "verify";
    report["seed"] = seed;
    report["suites"] = suites;
    write_json(out_path(args, cfg.report_path), report);
    return all_pass ? kExitOk : kExitCertificate;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"volume-growth machinery for cocycles on finite-dimensional normed spaces"};
    app.require_subcommand(1);

    CommonArgs ex_args, fi_args, sp_args, ge_args, su_args, ve_args;
    std::string suite = "all";
    std::string scale = "quick";

    add_common(app.add_subcommand("exponents", "growth rates and the exponent spectrum"),
               ex_args, true);
    add_common(app.add_subcommand("filtration", "nested slow subspaces"), fi_args, true);
    add_common(app.add_subcommand("spectral", "V_q / c_q profile of the first operator"),
               sp_args, true);
    add_common(app.add_subcommand("geometry", "seeded subspace geometry demonstration"),
               ge_args, false);
    add_common(app.add_subcommand("sublevel", "sublevel-set convergence"), su_args, true);
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "run the invariant certificate suites");
    add_common(verify_cmd, ve_args, false);
    verify_cmd->add_option("--suite", suite, "geometry|volume|spectral|met|all");
    verify_cmd->add_option("--scale", scale, "quick|full sweep sizes");

    CLI::App* cocycles_cmd = app.add_subcommand("cocycles", "cocycle utilities");
    cocycles_cmd->require_subcommand(1);
    cocycles_cmd->add_subcommand("list", "enumerate cocycle kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (app.got_subcommand("exponents")) return run_exponents(ex_args);
        if (app.got_subcommand("filtration")) return run_filtration(fi_args);
        if (app.got_subcommand("spectral")) return run_spectral(sp_args);
        if (app.got_subcommand("geometry")) return run_geometry(ge_args);
        if (app.got_subcommand("sublevel")) return run_sublevel(su_args);
        if (app.got_subcommand("verify")) return run_verify(ve_args, suite, scale);
        if (app.got_subcommand("cocycles")) {
            for (const auto& k : cocycle_kind_names()) std::cout << k << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return kExitCertificate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitConfig;
}
