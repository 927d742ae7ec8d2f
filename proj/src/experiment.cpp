#include <string>

#include "oed/errors.hpp"
#include "oed/harness.hpp"
#include "oed/persist.hpp"
#include "oed/random.hpp"

namespace oed {

DesignMode parse_design_mode(const std::string& text) {
    if (text == "is") return DesignMode::InputState;
    if (text == "is-depth") return DesignMode::InputStateDepth;
    if (text == "io") return DesignMode::InputOutput;
    if (text == "io-unknown-n") return DesignMode::InputOutputUnknownN;
    if (text == "pe") return DesignMode::PeBaseline;
    throw ConfigError("unknown design mode '" + text + "'");
}

std::string to_string(DesignMode mode) {
    switch (mode) {
        case DesignMode::InputState: return "is";
        case DesignMode::InputStateDepth: return "is-depth";
        case DesignMode::InputOutput: return "io";
        case DesignMode::InputOutputUnknownN: return "io-unknown-n";
        case DesignMode::PeBaseline: return "pe";
    }
    return "?";
}

PolicyMode parse_policy_mode(const std::string& text) {
    if (text == "first-basis") return PolicyMode::FirstBasis;
    if (text == "norm") return PolicyMode::NormConstrained;
    if (text == "random") return PolicyMode::SeededRandom;
    throw ConfigError("unknown input policy '" + text + "'");
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    if (!(config.delta > 0.0)) throw ConfigError("delta must be positive");
    if (config.tol.rel < 0.0 || config.tol.abs < 0.0) throw ConfigError("tolerances must be nonnegative");

    const auto system_seed = derive_seed(config.seed, {1});
    LtiSystem sys = std::holds_alternative<RandomSystemSpec>(config.system_source)
                        ? [&] {
                              const auto& spec = std::get<RandomSystemSpec>(config.system_source);
                              return random_minimal_system(spec.n, spec.m, spec.p, 1.0, system_seed, config.tol);
                          }()
                        : load_system_json(std::get<std::filesystem::path>(config.system_source));
    validate_for_design(sys, config.mode, config.L, config.tol, config.allow_unobservable);

    const Index n = sys.n(), m = sys.m();
    Vector x0 = random_initial_state(n, derive_seed(config.seed, {2}));

    DesignProblem problem;
    problem.L = config.L;
    problem.policy = InputPolicy{config.policy, config.delta, derive_seed(config.seed, {3})};
    problem.tol = config.tol;
    problem.eta_threshold = config.eta_threshold;
    problem.step_cap = config.step_cap;

    const bool state_mode = config.mode == DesignMode::InputState || config.mode == DesignMode::InputStateDepth;
    PlantOracle plant(sys, x0, state_mode ? Exposure::State : Exposure::Output);

    ExperimentOutcome outcome{sys, x0, {}, {}, {}};
    switch (config.mode) {
        case DesignMode::InputState:
            if (config.L != 1) throw ConfigError("mode is uses L = 1; use is-depth for deeper designs");
            outcome.log = design_input_state(plant, problem).log;
            break;
        case DesignMode::InputStateDepth:
            outcome.log = design_input_state_depth(plant, problem).log;
            break;
        case DesignMode::InputOutput:
            problem.n_known = n;
            outcome.log = design_input_output(plant, problem).log;
            break;
        case DesignMode::InputOutputUnknownN:
            outcome.log = design_input_output_unknown_n(plant, problem).log;
            break;
        case DesignMode::PeBaseline: {
            const Index order = n + config.L;
            const Index T = (m + 1) * order - 1;
            const PeInput pe = design_pe_baseline(m, order, T, derive_seed(config.seed, {4}), config.tol);
            for (Index k = 0; k < pe.u.size(); ++k) plant.apply(pe.u[k]);
            outcome.log.final.T = T;
            outcome.log.final.target_rank = n + m * config.L;
            break;
        }
    }
    outcome.trajectory = plant.hidden_record();

    const Trajectory& tr = outcome.trajectory;
    switch (config.mode) {
        case DesignMode::InputState: outcome.check = check_is_rank(tr.u, *tr.x, n, config.tol); break;
        case DesignMode::InputStateDepth:
            outcome.check = check_is_depth_rank(tr.u, *tr.x, config.L, n, config.tol);
            break;
        default: outcome.check = check_io_rank(tr.u, *tr.y, config.L, n, config.tol); break;
    }
    if (config.mode == DesignMode::PeBaseline) outcome.log.final.final_rank = outcome.check.rank;

    if (!config.out.empty()) {
        write_text_file(config.out / "system.json", system_to_json(sys));
        write_text_file(config.out / "log.json", design_log_to_json(outcome.log));
        write_text_file(config.out / "trajectory.csv", trajectory_to_csv(outcome.trajectory));
    }
    return outcome;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
        dynamic_cast<const NonFiniteError*>(&e)) {
        return 2;
    }
    if (dynamic_cast<const InfeasibleError*>(&e) || dynamic_cast<const StructureError*>(&e) ||
        dynamic_cast<const GenerationError*>(&e)) {
        return 3;
    }
    if (dynamic_cast<const RunawayError*>(&e)) return 4;
    return 1;
}

}  // namespace oed
