#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oed/designer.hpp"
#include "oed/lti.hpp"
#include "oed/verifier.hpp"

namespace oed {

struct RandomSystemSpec {
    Index n = 2;
    Index m = 1;
    Index p = 1;
};

struct ExperimentConfig {
    DesignMode mode = DesignMode::InputState;
    std::variant<std::filesystem::path, RandomSystemSpec> system_source = RandomSystemSpec{};
    Index L = 1;
    double delta = 1.0;
    PolicyMode policy = PolicyMode::FirstBasis;
    Tolerance tol;
    double eta_threshold = 1e-8;
    std::uint64_t seed = 0;
    long step_cap = 0;
    bool allow_unobservable = false;
    /// Output directory; empty disables file output.
    std::filesystem::path out;
};

struct ExperimentOutcome {
    LtiSystem system;
    Vector x0;
    DesignLog log;
    /// Full record (u, x, y) of the plant.
    Trajectory trajectory;
    RankCheck check;
};

DesignMode parse_design_mode(const std::string& text);
std::string to_string(DesignMode mode);
PolicyMode parse_policy_mode(const std::string& text);

/// Builds the plant, runs the selected design and the matching rank check.
/// Writes system.json, log.json and trajectory.csv into config.out when set.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// Process exit status: 2 configuration, 3 infeasible or structural,
/// 4 runaway, 1 for anything else.
int exit_code_for(const std::exception& e);

struct Range {
    Index lo = 1;
    Index hi = 1;
};

/// Parsed from "n=1..8,m=1..3,L=1..4[,p=1..2]". Without a p range each cell
/// uses p = n.
struct SweepGrid {
    Range n, m, L;
    std::optional<Range> p;
};

enum class SweepMethod { OnlineIS, OnlineISDepth, OnlineIO, OnlineIOUnknownN, PE };

SweepGrid parse_grid(const std::string& text);
/// Comma-separated list of online-is, online-is-depth, online-io,
/// online-io-unknown-n, pe. Throws ConfigError when empty.
std::vector<SweepMethod> parse_methods(const std::string& text);
std::string to_string(SweepMethod method);
SweepMethod parse_sweep_method(const std::string& text);

struct SweepRow {
    Index n = 0, m = 0, p = 0, L = 0;
    int trial = 0;
    std::string method;
    Index T_used = 0;
    Index target_rank = 0;
    Index achieved_rank = 0;
    bool pass = false;
    /// Smallest |scalar| over certificate steps.
    std::optional<double> margin_min;
    /// Error class of a failed trial (empty on success).
    std::string error;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

struct SweepOptions {
    double delta = 1.0;
    Tolerance tol;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned threads = 0;
};

/// One fresh random minimal system per (cell, trial); each method runs to its
/// terminal T. Rows come back in cell/trial/method order.
SweepResult run_sweep(const SweepGrid& grid, int trials, const std::vector<SweepMethod>& methods,
                      std::uint64_t seed, const SweepOptions& options = {});

struct PlotRow {
    Index n = 0, m = 0, L = 0;
    std::string method;
    double mean_T = 0.0;
    double pass_rate = 0.0;
};

/// Long-format aggregation per (n, m, L, method).
std::vector<PlotRow> emit_plotdata(const SweepResult& sweep);

struct MethodSummary {
    std::string method;
    int trials = 0;
    double pass_rate = 0.0;
    double mean_T = 0.0;
};

std::vector<MethodSummary> summarize(const SweepResult& sweep);

std::string sweep_to_csv(const SweepResult& sweep);
SweepResult parse_sweep_csv(const std::string& text);
std::string plotdata_to_csv(const std::vector<PlotRow>& rows);
std::string summary_to_csv(const std::vector<MethodSummary>& rows);

}  // namespace oed
