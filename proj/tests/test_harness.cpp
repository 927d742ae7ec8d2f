#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "oed/errors.hpp"
#include "oed/harness.hpp"
#include "oed/persist.hpp"
#include "oed/random.hpp"

using namespace oed;
namespace fs = std::filesystem;

namespace {

const fs::path kData = OED_TEST_DATA_DIR;

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("oed_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

Trajectory random_trajectory(Rng& rng, Index m, Index p, Index n, Index len, bool with_x) {
    Trajectory tr;
    tr.u = VectorSeq(m);
    VectorSeq y(p), x(n);
    for (Index t = 0; t < len; ++t) {
        Vector u(m), yt(p);
        for (Index i = 0; i < m; ++i) u(i) = rng.uniform(-1e3, 1e3);
        for (Index i = 0; i < p; ++i) yt(i) = rng.uniform(-1, 1) * std::pow(10.0, rng.integer(-12, 12));
        tr.u.push_back(u);
        y.push_back(yt);
    }
    for (Index t = 0; t <= len; ++t) {
        Vector xt(n);
        for (Index i = 0; i < n; ++i) xt(i) = rng.uniform(-1, 1) / 3.0;
        x.push_back(xt);
    }
    tr.y = std::move(y);
    if (with_x) tr.x = std::move(x);
    return tr;
}

ExperimentConfig two_state_config(DesignMode mode) {
    ExperimentConfig config;
    config.mode = mode;
    config.system_source = kData / "two_state.json";
    config.seed = 7;
    return config;
}

}  // namespace

TEST_CASE("system JSON round-trip") {
    const LtiSystem loaded = load_system_json(kData / "two_state.json");
    CHECK(loaded.n() == 2);
    CHECK(loaded.m() == 1);
    CHECK(loaded.p() == 2);
    CHECK(parse_system_json(system_to_json(loaded)) == loaded);
    for (std::uint64_t k = 0; k < 20; ++k) {
        const LtiSystem sys = random_minimal_system(1 + k % 6, 1 + k % 3, 1 + k % 2, 1.0, derive_seed(3000, {k}));
        CHECK(parse_system_json(system_to_json(sys)) == sys);
    }
    CHECK_THROWS_AS(parse_system_json("{"), ConfigError);
    CHECK_THROWS_AS(parse_system_json(R"({"A": [[1]], "B": [[1]], "C": [[1]]})"), ConfigError);
    CHECK_THROWS_AS(parse_system_json(R"({"A": [[1, 2]], "B": [[1]], "C": [[1]], "D": [[0]]})"), DimensionError);
    CHECK_THROWS_AS(load_system_json(kData / "missing.json"), ConfigError);
}

TEST_CASE("design log JSON round-trip") {
    for (std::uint64_t k = 0; k < 10; ++k) {
        ExperimentConfig config;
        config.mode = k % 2 ? DesignMode::InputOutputUnknownN : DesignMode::InputStateDepth;
        config.system_source = RandomSystemSpec{1 + static_cast<Index>(k % 4), 1 + static_cast<Index>(k % 2), 2};
        config.L = 3;
        config.policy = PolicyMode::SeededRandom;
        config.seed = k;
        const ExperimentOutcome out = run_experiment(config);
        const DesignLog back = parse_design_log_json(design_log_to_json(out.log));
        REQUIRE(back.steps.size() == out.log.steps.size());
        for (std::size_t i = 0; i < back.steps.size(); ++i) {
            const DesignStep &a = out.log.steps[i], &b = back.steps[i];
            CHECK(a.t == b.t);
            CHECK(a.branch == b.branch);
            CHECK(a.u == b.u);
            CHECK(a.scalar == b.scalar);
            CHECK(a.rank_after == b.rank_after);
            CHECK(a.image_residual == b.image_residual);
            CHECK(a.certificate.has_value() == b.certificate.has_value());
            if (a.certificate && b.certificate) {
                CHECK(a.certificate->xi == b.certificate->xi);
                CHECK(a.certificate->eta == b.certificate->eta);
                CHECK(a.certificate->residual == b.certificate->residual);
            }
        }
        CHECK(back.final.T == out.log.final.T);
        CHECK(back.final.final_rank == out.log.final.final_rank);
        CHECK(back.final.target_rank == out.log.final.target_rank);
        CHECK(back.final.n_recovered == out.log.final.n_recovered);
    }
    CHECK_THROWS_AS(parse_design_log_json(R"({"steps": [{"t": 0}]})"), ConfigError);
}

TEST_CASE("trajectory CSV round-trip") {
    Rng rng(3100);
    for (int trial = 0; trial < 20; ++trial) {
        const Trajectory tr =
            random_trajectory(rng, rng.integer(1, 3), rng.integer(1, 3), rng.integer(1, 4), rng.integer(1, 9), trial % 2);
        const Trajectory back = parse_trajectory_csv(trajectory_to_csv(tr));
        CHECK(back.u == tr.u);
        CHECK(back.y == tr.y);
        CHECK(back.x.has_value() == tr.x.has_value());
        if (tr.x) CHECK(*back.x == *tr.x);
    }
    CHECK_THROWS_AS(parse_trajectory_csv("t,u_1\n0,abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_trajectory_csv("t,u_1,y_1\n0,1\n"), ConfigError);
}

TEST_CASE("format_double round-trips exactly") {
    Rng rng(3200);
    for (int trial = 0; trial < 200; ++trial) {
        const double v = rng.uniform(-1, 1) * std::pow(10.0, rng.integer(-300, 300));
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-0.5) == "-0.5");
    CHECK_THROWS_AS(parse_double("1.5x"), ConfigError);
}

TEST_CASE("run_experiment") {
    SUBCASE("state design on the stored two-state system") {
        const fs::path dir = scratch_dir("is");
        ExperimentConfig config = two_state_config(DesignMode::InputState);
        config.out = dir;
        const ExperimentOutcome out = run_experiment(config);
        CHECK(out.check.pass);
        CHECK(out.trajectory.length() == 3);
        const Trajectory saved = parse_trajectory_csv(read_text_file(dir / "trajectory.csv"));
        CHECK(saved.u.size() == 3);
        CHECK(saved.u == out.trajectory.u);
        CHECK(load_system_json(dir / "system.json") == out.system);
        CHECK(parse_design_log_json(read_text_file(dir / "log.json")).final.T == 3);
        fs::remove_all(dir);
    }
    SUBCASE("exciting baseline reaches rank n+mL at (m+1)(n+L)-1 samples") {
        for (std::uint64_t k = 0; k < 10; ++k) {
            ExperimentConfig config;
            config.mode = DesignMode::PeBaseline;
            const Index n = 1 + k % 4, m = 1 + k % 2;
            config.system_source = RandomSystemSpec{n, m, 1};
            config.L = n + 1;
            config.seed = k;
            const ExperimentOutcome out = run_experiment(config);
            CHECK(out.trajectory.length() == (m + 1) * (n + config.L) - 1);
            CHECK(out.check.rank == n + m * config.L);
            CHECK(out.check.pass);
        }
    }
    SUBCASE("identical configurations produce byte-identical files") {
        for (DesignMode mode : {DesignMode::InputState, DesignMode::InputOutput, DesignMode::InputOutputUnknownN,
                                DesignMode::PeBaseline}) {
            ExperimentConfig config;
            config.mode = mode;
            config.system_source = RandomSystemSpec{3, 2, 2};
            config.L = mode == DesignMode::InputState ? 1 : 4;
            config.policy = PolicyMode::SeededRandom;
            config.seed = 123;
            const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
            config.out = a;
            run_experiment(config);
            config.out = b;
            run_experiment(config);
            for (const char* file : {"system.json", "log.json", "trajectory.csv"})
                CHECK(read_text_file(a / file) == read_text_file(b / file));
            fs::remove_all(a);
            fs::remove_all(b);
        }
    }
    SUBCASE("structural preconditions") {
        ExperimentConfig config = two_state_config(DesignMode::InputOutput);
        config.L = 1;
        CHECK_THROWS_AS(run_experiment(config), ConfigError);
    }
}

TEST_CASE("mode and policy names") {
    for (DesignMode mode : {DesignMode::InputState, DesignMode::InputStateDepth, DesignMode::InputOutput,
                            DesignMode::InputOutputUnknownN, DesignMode::PeBaseline})
        CHECK(parse_design_mode(to_string(mode)) == mode);
    CHECK_THROWS_AS(parse_design_mode("bogus"), ConfigError);
    CHECK(parse_policy_mode("norm") == PolicyMode::NormConstrained);
    CHECK_THROWS_AS(parse_policy_mode(""), ConfigError);
}

TEST_CASE("exit_code_for") {
    CHECK(exit_code_for(ConfigError("x")) == 2);
    CHECK(exit_code_for(DimensionError("x")) == 2);
    CHECK(exit_code_for(InfeasibleError("x")) == 3);
    CHECK(exit_code_for(StructureError("x")) == 3);
    CHECK(exit_code_for(RunawayError("x")) == 4);
    CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("parse_grid and parse_methods") {
    const SweepGrid g = parse_grid("n=1..8,m=1..3,L=2..4,p=1..2");
    CHECK(g.n.lo == 1);
    CHECK(g.n.hi == 8);
    CHECK(g.L.lo == 2);
    REQUIRE(g.p);
    CHECK(g.p->hi == 2);
    CHECK_FALSE(parse_grid("n=2..2,m=1..1,L=1..1").p);
    CHECK(parse_grid("n=3,m=1,L=1").n.hi == 3);
    CHECK_THROWS_AS(parse_grid("n=1..8,m=1..3"), ConfigError);
    CHECK_THROWS_AS(parse_grid("n=3..1,m=1..1,L=1..1"), ConfigError);
    CHECK_THROWS_AS(parse_grid("n=0..1,m=1..1,L=1..1"), ConfigError);
    CHECK_THROWS_AS(parse_grid("n=1..2,m=1..1,L=1..1,q=1..1"), ConfigError);

    CHECK(parse_methods("online-is,pe") == std::vector<SweepMethod>{SweepMethod::OnlineIS, SweepMethod::PE});
    CHECK_THROWS_AS(parse_methods(""), ConfigError);
    CHECK_THROWS_AS(parse_methods("online-is,magic"), ConfigError);
}

TEST_CASE("run_sweep over state designs and the baseline") {
    const SweepResult sweep = run_sweep(parse_grid("n=1..8,m=1..3,L=1..1"), 10,
                                        {SweepMethod::OnlineIS, SweepMethod::PE}, 20201214);
    CHECK(sweep.rows.size() == 8 * 3 * 10 * 2);
    for (const SweepRow& row : sweep.rows) {
        CHECK(row.pass);
        CHECK(row.error.empty());
        if (row.method == "online-is") CHECK(row.T_used == row.n + row.m);
        if (row.method == "pe") CHECK(row.T_used == (row.m + 1) * (row.n + 1) - 1);
    }
    for (const MethodSummary& s : summarize(sweep)) CHECK(s.pass_rate == 1.0);

    const SweepResult back = parse_sweep_csv(sweep_to_csv(sweep));
    CHECK(back.rows == sweep.rows);

    const SweepResult serial = run_sweep(parse_grid("n=1..3,m=1..2,L=1..1"), 3,
                                         {SweepMethod::OnlineIS, SweepMethod::PE}, 5, {1.0, {}, 1});
    const SweepResult parallel = run_sweep(parse_grid("n=1..3,m=1..2,L=1..1"), 3,
                                           {SweepMethod::OnlineIS, SweepMethod::PE}, 5, {1.0, {}, 4});
    CHECK(serial.rows == parallel.rows);
}

TEST_CASE("run_sweep saves mn samples over the baseline for output designs") {
    const SweepResult sweep = run_sweep(parse_grid("n=1..4,m=1..2,L=5..5,p=1..2"), 3,
                                        {SweepMethod::OnlineIO, SweepMethod::OnlineIOUnknownN, SweepMethod::PE}, 77);
    const std::vector<PlotRow> plot = emit_plotdata(sweep);
    std::map<std::tuple<Index, Index, Index>, std::map<std::string, double>> cells;
    for (const PlotRow& row : plot) {
        cells[{row.n, row.m, row.L}][row.method] = row.mean_T;
        if (row.method != "pe") CHECK(row.pass_rate == 1.0);
    }
    CHECK(cells.size() == 8);
    for (const auto& [key, by_method] : cells) {
        const auto [n, m, L] = key;
        CHECK(by_method.at("pe") - by_method.at("online-io") == static_cast<double>(m * n));
        CHECK(by_method.at("online-io-unknown-n") == by_method.at("online-io"));
        CHECK(by_method.at("online-io") < by_method.at("pe"));
    }
}

TEST_CASE("emit_plotdata on a single cell") {
    const SweepResult sweep = run_sweep(parse_grid("n=2..2,m=1..1,L=1..1"), 4, {SweepMethod::OnlineIS}, 1);
    const std::vector<PlotRow> plot = emit_plotdata(sweep);
    REQUIRE(plot.size() == 1);
    CHECK(plot[0].mean_T == 3.0);
    CHECK(plot[0].pass_rate == 1.0);
    const std::string csv = plotdata_to_csv(plot);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("run_sweep records failures in-row") {
    // L = 1 is never past the lag, so output designs fail and the sweep carries on
    const SweepResult sweep =
        run_sweep(parse_grid("n=2..2,m=1..1,L=1..1,p=1..1"), 2, {SweepMethod::OnlineIO, SweepMethod::OnlineIS}, 9);
    REQUIRE(sweep.rows.size() == 4);
    for (const SweepRow& row : sweep.rows) {
        if (row.method == "online-io") {
            CHECK_FALSE(row.pass);
            CHECK(row.error == "config");
        } else {
            CHECK(row.pass);
        }
    }
}
