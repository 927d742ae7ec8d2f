#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "oed/errors.hpp"
#include "oed/harness.hpp"
#include "oed/persist.hpp"
#include "oed/verifier.hpp"

namespace {

oed::RandomSystemSpec parse_random_spec(const std::string& text) {
    oed::RandomSystemSpec spec;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> spec.n >> c1 >> spec.m >> c2 >> spec.p) || c1 != ',' || c2 != ',' || !in.eof()) {
        throw oed::ConfigError("--random expects n,m,p, got '" + text + "'");
    }
    return spec;
}

int run_design(const oed::ExperimentConfig& config) {
    const auto outcome = oed::run_experiment(config);
    std::cout << "mode=" << oed::to_string(config.mode) << " n=" << outcome.system.n() << " m=" << outcome.system.m()
              << " p=" << outcome.system.p() << " T=" << outcome.log.final.T << " rank=" << outcome.check.rank
              << " target=" << outcome.check.target;
    if (outcome.log.final.n_recovered) std::cout << " n_recovered=" << *outcome.log.final.n_recovered;
    std::cout << " pass=" << (outcome.check.pass ? "true" : "false") << "\n";
    return outcome.check.pass ? 0 : 1;
}

int run_sweep_cmd(const std::string& grid_text, int trials, const std::string& methods_text, std::uint64_t seed,
                  const std::filesystem::path& out, const oed::SweepOptions& options) {
    const auto grid = oed::parse_grid(grid_text);
    const auto methods = oed::parse_methods(methods_text);
    const auto result = oed::run_sweep(grid, trials, methods, seed, options);
    const auto summary = oed::summarize(result);
    oed::write_text_file(out / "sweep.csv", oed::sweep_to_csv(result));
    oed::write_text_file(out / "plot.csv", oed::plotdata_to_csv(oed::emit_plotdata(result)));
    const auto summary_csv = oed::summary_to_csv(summary);
    oed::write_text_file(out / "summary.csv", summary_csv);
    std::cout << summary_csv;
    for (const auto& s : summary) {
        if (s.pass_rate < 1.0) return 1;
    }
    return 0;
}

int run_verify(const std::filesystem::path& data, oed::Index L, oed::Index n, const std::string& kind,
               const oed::Tolerance& tol) {
    const auto traj = oed::parse_trajectory_csv(oed::read_text_file(data / "trajectory.csv"));
    oed::RankCheck check;
    if (kind == "io") {
        if (!traj.y) throw oed::ConfigError("verify: trajectory has no outputs");
        check = oed::check_io_rank(traj.u, *traj.y, L, n, tol);
    } else if (kind == "is") {
        if (!traj.x) throw oed::ConfigError("verify: trajectory has no states");
        check = oed::check_is_depth_rank(traj.u, *traj.x, L, n, tol);
    } else {
        throw oed::ConfigError("verify: --kind must be io or is");
    }
    std::cout << "kind=" << kind << " T=" << traj.u.size() << " rank=" << check.rank << " target=" << check.target
              << " pass=" << (check.pass ? "true" : "false") << "\n";
    return check.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online input design for sample-efficient data-driven modeling"};
    app.require_subcommand(1);

    oed::ExperimentConfig config;
    std::string mode = "is", system_file, random_spec, policy = "first-basis";
    auto* design = app.add_subcommand("design", "Run one online (or PE baseline) experiment");
    design->add_option("--mode", mode, "is | is-depth | io | io-unknown-n | pe")->capture_default_str();
    auto* sys_opt = design->add_option("--system", system_file, "System JSON file");
    auto* rnd_opt = design->add_option("--random", random_spec, "Random minimal system n,m,p");
    sys_opt->excludes(rnd_opt);
    design->add_option("--L", config.L, "Hankel depth")->capture_default_str();
    design->add_option("--delta", config.delta, "Input magnitude")->capture_default_str();
    design->add_option("--policy", policy, "first-basis | norm | random")->capture_default_str();
    design->add_option("--seed", config.seed, "Master seed")->capture_default_str();
    design->add_option("--tol-rel", config.tol.rel, "Relative rank tolerance")->capture_default_str();
    design->add_option("--tol-abs", config.tol.abs, "Absolute rank tolerance")->capture_default_str();
    design->add_option("--eta-threshold", config.eta_threshold, "Certificate threshold on |eta_1|")
        ->capture_default_str();
    design->add_option("--step-cap", config.step_cap, "Unknown-n runaway guard (0 = default)");
    design->add_flag("--allow-unobservable", config.allow_unobservable,
                     "State designs: require controllability only");
    design->add_option("--out", config.out, "Output directory");

    std::string grid, methods;
    int trials = 10;
    std::uint64_t sweep_seed = 0;
    std::filesystem::path sweep_out = "sweep_out";
    oed::SweepOptions sweep_options;
    auto* sweep = app.add_subcommand("sweep", "Seeded ensemble comparison of design methods");
    sweep->add_option("--grid", grid, "e.g. n=1..8,m=1..3,L=1..4[,p=1..2]")->required();
    sweep->add_option("--trials", trials, "Trials per grid cell")->capture_default_str();
    sweep->add_option("--methods", methods, "online-is,online-is-depth,online-io,online-io-unknown-n,pe")
        ->required();
    sweep->add_option("--seed", sweep_seed, "Master seed")->capture_default_str();
    sweep->add_option("--delta", sweep_options.delta, "Input magnitude")->capture_default_str();
    sweep->add_option("--tol-rel", sweep_options.tol.rel, "Relative rank tolerance")->capture_default_str();
    sweep->add_option("--threads", sweep_options.threads, "Worker threads (0 = all cores)");
    sweep->add_option("--out", sweep_out, "Output directory")->capture_default_str();

    std::filesystem::path data;
    oed::Index verify_l = 1, verify_n = 1;
    std::string kind = "io";
    oed::Tolerance verify_tol;
    auto* verify = app.add_subcommand("verify", "Rank check of a stored trajectory");
    verify->add_option("--data", data, "Directory holding trajectory.csv")->required();
    verify->add_option("--L", verify_l, "Hankel depth")->required();
    verify->add_option("--n", verify_n, "State dimension")->required();
    verify->add_option("--kind", kind, "io (outputs) or is (states)")->capture_default_str();
    verify->add_option("--tol-rel", verify_tol.rel, "Relative rank tolerance")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*design) {
            config.mode = oed::parse_design_mode(mode);
            config.policy = oed::parse_policy_mode(policy);
            if (!system_file.empty()) {
                config.system_source = std::filesystem::path(system_file);
            } else if (!random_spec.empty()) {
                config.system_source = parse_random_spec(random_spec);
            } else {
                throw oed::ConfigError("design: one of --system or --random is required");
            }
            return run_design(config);
        }
        if (*sweep) return run_sweep_cmd(grid, trials, methods, sweep_seed, sweep_out, sweep_options);
        return run_verify(data, verify_l, verify_n, kind, verify_tol);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return oed::exit_code_for(e);
    }
}
