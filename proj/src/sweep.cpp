#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "oed/errors.hpp"
#include "oed/harness.hpp"
#include "oed/persist.hpp"
#include "oed/random.hpp"

namespace oed {

namespace {

Range parse_range(const std::string& text, const std::string& key) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const Index v = std::stol(text);
            return {v, v};
        }
        return {std::stol(text.substr(0, dots)), std::stol(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw ConfigError("grid: cannot parse range '" + text + "' for " + key);
    }
}

std::string error_tag(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const StructureError*>(&e)) return "structure";
    if (dynamic_cast<const InfeasibleError*>(&e)) return "infeasible";
    if (dynamic_cast<const RunawayError*>(&e)) return "runaway";
    if (dynamic_cast<const GenerationError*>(&e)) return "generation";
    if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
    return "error";
}

struct Cell {
    Index n, m, p, L;
};

SweepRow blank_row(const Cell& cell, int trial, SweepMethod method) {
    SweepRow row;
    row.n = cell.n;
    row.m = cell.m;
    row.p = cell.p;
    row.L = cell.L;
    row.trial = trial;
    row.method = to_string(method);
    return row;
}

std::optional<double> margin_of(const DesignLog& log) {
    std::optional<double> margin;
    for (const auto& s : log.steps) {
        if (s.scalar) margin = std::min(margin.value_or(std::numeric_limits<double>::infinity()), std::abs(*s.scalar));
    }
    return margin;
}

SweepRow run_method(const Cell& cell, int trial, SweepMethod method, const LtiSystem& sys, const Vector& x0,
                    std::uint64_t trial_seed, const SweepOptions& options) {
    SweepRow row = blank_row(cell, trial, method);
    DesignProblem problem;
    problem.L = cell.L;
    problem.tol = options.tol;
    problem.policy = InputPolicy{PolicyMode::FirstBasis, options.delta, derive_seed(trial_seed, {3})};
    const Index n = cell.n, m = cell.m, L = cell.L;
    try {
        switch (method) {
            case SweepMethod::OnlineIS: {
                PlantOracle plant(sys, x0, Exposure::State);
                const auto r = design_input_state(plant, problem);
                const auto check = check_is_rank(r.trajectory.u, *r.trajectory.x, n, options.tol);
                row.T_used = r.log.final.T;
                row.target_rank = check.target;
                row.achieved_rank = check.rank;
                row.margin_min = margin_of(r.log);
                break;
            }
            case SweepMethod::OnlineISDepth: {
                PlantOracle plant(sys, x0, Exposure::State);
                const auto r = design_input_state_depth(plant, problem);
                const auto check = check_is_depth_rank(r.trajectory.u, *r.trajectory.x, L, n, options.tol);
                row.T_used = r.log.final.T;
                row.target_rank = check.target;
                row.achieved_rank = check.rank;
                row.margin_min = margin_of(r.log);
                break;
            }
            case SweepMethod::OnlineIO:
            case SweepMethod::OnlineIOUnknownN: {
                const bool unknown = method == SweepMethod::OnlineIOUnknownN;
                validate_for_design(sys, unknown ? DesignMode::InputOutputUnknownN : DesignMode::InputOutput, L,
                                    options.tol);
                PlantOracle plant(sys, x0, Exposure::Output);
                if (!unknown) problem.n_known = n;
                const auto r = unknown ? design_input_output_unknown_n(plant, problem)
                                       : design_input_output(plant, problem);
                const auto check = check_io_rank(r.trajectory.u, *r.trajectory.y, L, n, options.tol);
                row.T_used = r.log.final.T;
                row.target_rank = check.target;
                row.achieved_rank = check.rank;
                row.margin_min = margin_of(r.log);
                if (unknown && r.log.final.n_recovered != n) {
                    row.error = "n_mismatch";
                }
                break;
            }
            case SweepMethod::PE: {
                const Index order = n + L;
                const Index T = (m + 1) * order - 1;
                const auto pe = design_pe_baseline(m, order, T, derive_seed(trial_seed, {4}), options.tol);
                const auto traj = simulate(sys, x0, pe.u);
                const auto check = check_io_rank(traj.u, *traj.y, L, n, options.tol);
                row.T_used = T;
                row.target_rank = check.target;
                row.achieved_rank = check.rank;
                break;
            }
        }
        row.pass = row.error.empty() && row.achieved_rank == row.target_rank;
    } catch (const Error& e) {
        row.pass = false;
        row.error = error_tag(e);
    }
    return row;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

SweepGrid parse_grid(const std::string& text) {
    SweepGrid grid;
    bool has_n = false, has_m = false, has_l = false;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("grid: expected key=range, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const Range r = parse_range(item.substr(eq + 1), key);
        if (r.lo < 1 || r.hi < r.lo) throw ConfigError("grid: empty or nonpositive range for " + key);
        if (key == "n") grid.n = r, has_n = true;
        else if (key == "m") grid.m = r, has_m = true;
        else if (key == "L") grid.L = r, has_l = true;
        else if (key == "p") grid.p = r;
        else throw ConfigError("grid: unknown key '" + key + "'");
    }
    if (!has_n || !has_m || !has_l) throw ConfigError("grid: n, m and L ranges are required");
    return grid;
}

std::string to_string(SweepMethod method) {
    switch (method) {
        case SweepMethod::OnlineIS: return "online-is";
        case SweepMethod::OnlineISDepth: return "online-is-depth";
        case SweepMethod::OnlineIO: return "online-io";
        case SweepMethod::OnlineIOUnknownN: return "online-io-unknown-n";
        case SweepMethod::PE: return "pe";
    }
    return "?";
}

SweepMethod parse_sweep_method(const std::string& text) {
    for (auto m : {SweepMethod::OnlineIS, SweepMethod::OnlineISDepth, SweepMethod::OnlineIO,
                   SweepMethod::OnlineIOUnknownN, SweepMethod::PE}) {
        if (to_string(m) == text) return m;
    }
    throw ConfigError("unknown sweep method '" + text + "'");
}

std::vector<SweepMethod> parse_methods(const std::string& text) {
    std::vector<SweepMethod> methods;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        const auto m = parse_sweep_method(item);
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
    }
    if (methods.empty()) throw ConfigError("sweep: no methods selected");
    return methods;
}

SweepResult run_sweep(const SweepGrid& grid, int trials, const std::vector<SweepMethod>& methods,
                      std::uint64_t seed, const SweepOptions& options) {
    if (methods.empty()) throw ConfigError("sweep: no methods selected");
    if (trials < 1) throw ConfigError("sweep: trials must be >= 1");

    std::vector<std::pair<Cell, int>> jobs;
    for (Index n = grid.n.lo; n <= grid.n.hi; ++n)
        for (Index m = grid.m.lo; m <= grid.m.hi; ++m) {
            const Range pr = grid.p.value_or(Range{n, n});
            for (Index p = pr.lo; p <= pr.hi; ++p)
                for (Index L = grid.L.lo; L <= grid.L.hi; ++L)
                    for (int trial = 0; trial < trials; ++trial) jobs.push_back({Cell{n, m, p, L}, trial});
        }

    std::vector<std::vector<SweepRow>> slots(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            const auto& [cell, trial] = jobs[k];
            const auto trial_seed = derive_seed(seed, {static_cast<std::uint64_t>(cell.n), static_cast<std::uint64_t>(cell.m),
                                                       static_cast<std::uint64_t>(cell.p), static_cast<std::uint64_t>(cell.L),
                                                       static_cast<std::uint64_t>(trial)});
            auto& out = slots[k];
            try {
                const LtiSystem sys =
                    random_minimal_system(cell.n, cell.m, cell.p, 1.0, derive_seed(trial_seed, {1}), options.tol);
                const Vector x0 = random_initial_state(cell.n, derive_seed(trial_seed, {2}));
                for (auto method : methods) out.push_back(run_method(cell, trial, method, sys, x0, trial_seed, options));
            } catch (const Error& e) {
                for (auto method : methods) {
                    SweepRow row = blank_row(cell, trial, method);
                    row.error = error_tag(e);
                    out.push_back(row);
                }
            }
        }
    };
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SweepResult result;
    for (auto& s : slots) result.rows.insert(result.rows.end(), s.begin(), s.end());
    return result;
}

std::vector<PlotRow> emit_plotdata(const SweepResult& sweep) {
    if (sweep.rows.empty()) throw ConfigError("emit_plotdata: empty sweep");
    struct Acc {
        double sum_T = 0.0;
        int passes = 0;
        int count = 0;
    };
    std::map<std::tuple<Index, Index, Index, std::string>, Acc> cells;
    for (const auto& r : sweep.rows) {
        auto& a = cells[{r.n, r.m, r.L, r.method}];
        a.sum_T += static_cast<double>(r.T_used);
        a.passes += r.pass ? 1 : 0;
        ++a.count;
    }
    std::vector<PlotRow> out;
    for (const auto& [key, a] : cells) {
        const auto& [n, m, L, method] = key;
        out.push_back({n, m, L, method, a.sum_T / a.count, static_cast<double>(a.passes) / a.count});
    }
    return out;
}

std::vector<MethodSummary> summarize(const SweepResult& sweep) {
    std::map<std::string, MethodSummary> acc;
    for (const auto& r : sweep.rows) {
        auto& s = acc[r.method];
        s.method = r.method;
        ++s.trials;
        s.pass_rate += r.pass ? 1.0 : 0.0;
        s.mean_T += static_cast<double>(r.T_used);
    }
    std::vector<MethodSummary> out;
    for (auto& [_, s] : acc) {
        s.pass_rate /= s.trials;
        s.mean_T /= s.trials;
        out.push_back(s);
    }
    return out;
}

std::string sweep_to_csv(const SweepResult& sweep) {
    std::string out = "n,m,p,L,trial,method,T_used,target_rank,achieved_rank,pass,margin_min,error\n";
    for (const auto& r : sweep.rows) {
        out += std::to_string(r.n) + "," + std::to_string(r.m) + "," + std::to_string(r.p) + "," +
               std::to_string(r.L) + "," + std::to_string(r.trial) + "," + r.method + "," + std::to_string(r.T_used) +
               "," + std::to_string(r.target_rank) + "," + std::to_string(r.achieved_rank) + "," + bool_text(r.pass) +
               "," + (r.margin_min ? format_double(*r.margin_min) : std::string()) + "," + r.error + "\n";
    }
    return out;
}

SweepResult parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (line != "n,m,p,L,trial,method,T_used,target_rank,achieved_rank,pass,margin_min,error") {
        throw ConfigError("sweep csv: unexpected header");
    }
    SweepResult result;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 12) throw ConfigError("sweep csv: ragged row '" + line + "'");
        try {
            SweepRow r;
            r.n = std::stol(cells[0]);
            r.m = std::stol(cells[1]);
            r.p = std::stol(cells[2]);
            r.L = std::stol(cells[3]);
            r.trial = std::stoi(cells[4]);
            r.method = cells[5];
            r.T_used = std::stol(cells[6]);
            r.target_rank = std::stol(cells[7]);
            r.achieved_rank = std::stol(cells[8]);
            if (cells[9] != "true" && cells[9] != "false") throw ConfigError("sweep csv: bad pass flag");
            r.pass = cells[9] == "true";
            if (!cells[10].empty()) r.margin_min = parse_double(cells[10]);
            r.error = cells[11];
            result.rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw ConfigError("sweep csv: malformed row '" + line + "'");
        }
    }
    return result;
}

std::string plotdata_to_csv(const std::vector<PlotRow>& rows) {
    std::string out = "n,m,L,method,mean_T,pass_rate\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + std::to_string(r.m) + "," + std::to_string(r.L) + "," + r.method + "," +
               format_double(r.mean_T) + "," + format_double(r.pass_rate) + "\n";
    }
    return out;
}

std::string summary_to_csv(const std::vector<MethodSummary>& rows) {
    std::string out = "method,trials,pass_rate,mean_T\n";
    for (const auto& r : rows) {
        out += r.method + "," + std::to_string(r.trials) + "," + format_double(r.pass_rate) + "," +
               format_double(r.mean_T) + "\n";
    }
    return out;
}

}  // namespace oed
