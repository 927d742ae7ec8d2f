#include "oed/designer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "oed/errors.hpp"
#include "oed/random.hpp"

namespace oed {

Vector KernelCertificate::row() const {
    Vector w(xi.size() + eta.size());
    w << xi, eta;
    return w;
}

namespace {

void append_column(Matrix& s, const Vector& col) {
    s.conservativeResize(col.size(), s.cols() + 1);
    s.col(s.cols() - 1) = col;
}

/// Produces the inputs the theorems leave free.
class InputSource {
public:
    InputSource(const InputPolicy& policy, Index m) : policy_(policy), m_(m), rng_(policy.seed) {
        if (!(policy.delta > 0.0) || !std::isfinite(policy.delta)) {
            throw ConfigError("InputPolicy: delta must be positive and finite");
        }
    }

    /// Free choice (image-miss branch and u(0)); never zero.
    Vector arbitrary() {
        if (policy_.mode != PolicyMode::SeededRandom) return basis();
        Vector u(m_);
        for (Index i = 0; i < m_; ++i) u(i) = rng_.uniform(-1.0, 1.0);
        const double norm = u.norm();
        if (norm == 0.0) return basis();
        return policy_.delta * u / std::max(1.0, norm);
    }

    /// u(1..L-1) of the initial segment.
    Vector filler() const {
        return policy_.mode == PolicyMode::NormConstrained ? basis() : Vector(Vector::Zero(m_));
    }

private:
    Vector basis() const { return policy_.delta * Vector::Unit(m_, 0); }

    InputPolicy policy_;
    Index m_;
    Rng rng_;
};

/// Column j of the stacked matrix is [lead(j); u(j); ...; u(j+L-1)], where
/// lead(j) only depends on data available before u(j+L-1) is chosen.
struct ColumnLayout {
    Index lead_rows = 0;
    std::function<Vector(long)> lead;
};

enum class Stopping { KnownHorizon, UnknownN };

struct LoopOutcome {
    DesignLog log;
    Matrix stacked;
    long stop_t = 0;
};

/// Shared online loop of the depth-L designs. Stops after t = horizon - 1
/// (KnownHorizon) or at the first t where the image test passes without a
/// certificate (UnknownN).
LoopOutcome run_depth_loop(PlantOracle& plant, const DesignProblem& problem, const ColumnLayout& layout,
                           Stopping stopping, long horizon, const std::function<void()>& before_step) {
    const Index m = plant.input_dim();
    const Index L = problem.L;
    InputSource source(problem.policy, m);
    LoopOutcome out;
    out.stacked = Matrix(layout.lead_rows + m * L, 0);

    for (long t = 0;; ++t) {
        if (stopping == Stopping::KnownHorizon && t >= horizon) {
            out.stop_t = t;
            break;
        }
        if (stopping == Stopping::UnknownN && t > horizon) {
            throw RunawayError("online design: no stopping step up to t = " + std::to_string(horizon) +
                               " (tolerance breakdown?)");
        }
        before_step();
        if (t < L - 1) {
            plant.apply(t == 0 ? source.arbitrary() : source.filler());
            continue;
        }

        const long j = t - L + 1;
        const Index test_rows = out.stacked.rows() - m;
        Vector probe(test_rows);
        probe << layout.lead(j), plant.inputs().stacked(j, t - 1);

        DesignStep step;
        step.t = t;
        const Matrix test_matrix = out.stacked.topRows(test_rows);
        step.image_residual = image_residual(probe, test_matrix, problem.tol);
        const bool covered = step.image_residual <= problem.tol.abs + problem.tol.rel * probe.norm();

        if (!covered) {
            step.branch = Branch::ImageMiss;
            step.u = (t == L - 1 && L >= 2) ? source.filler() : source.arbitrary();
        } else {
            auto cert = find_certificate(out.stacked, layout.lead_rows, m, L, problem.tol, problem.eta_threshold);
            if (!cert) {
                if (stopping == Stopping::UnknownN) {
                    out.stop_t = t;
                    break;
                }
                throw InfeasibleError("online design: no kernel certificate at t = " + std::to_string(t) +
                                      " before the horizon T = " + std::to_string(horizon) +
                                      " (uncontrollable system or tolerance breakdown)");
            }
            const Vector w = cert->row();
            const double known = w.head(test_rows).dot(probe);
            step.branch = Branch::Certificate;
            step.u = choose_input(*cert, known, problem.policy);
            step.scalar = known + cert->eta1().dot(step.u);
            step.certificate = std::move(cert);
        }

        plant.apply(step.u);
        Vector column(out.stacked.rows());
        column << probe, step.u;
        append_column(out.stacked, column);
        step.rank_after = numerical_rank(out.stacked, problem.tol);
        out.log.steps.push_back(std::move(step));
    }
    return out;
}

void require_exposure(const PlantOracle& plant, Exposure expected, const char* who) {
    if (plant.exposure() != expected) {
        throw ConfigError(std::string(who) + ": plant must run in " +
                          (expected == Exposure::State ? "state" : "output") + " mode");
    }
}

void require_fresh(const PlantOracle& plant, const char* who) {
    if (plant.time() != 0) throw ConfigError(std::string(who) + ": plant has already been driven");
}

Index state_dimension(const PlantOracle& plant, const DesignProblem& problem, const char* who) {
    const Index n = plant.state_dim();
    if (problem.n_known && *problem.n_known != n) {
        throw DimensionError(std::string(who) + ": n_known = " + std::to_string(*problem.n_known) +
                             " but the plant state has dimension " + std::to_string(n));
    }
    return n;
}

Matrix io_final_matrix(const PlantOracle& plant, Index L, long T) {
    return stack_rows(hankel(plant.outputs(), L, 0, T - 1), hankel(plant.inputs(), L, 0, T - 1));
}

DesignResult output_design(PlantOracle& plant, const DesignProblem& problem, bool unknown_n) {
    const char* who = unknown_n ? "design_input_output_unknown_n" : "design_input_output";
    require_exposure(plant, Exposure::Output, who);
    require_fresh(plant, who);
    const Index m = plant.input_dim(), p = plant.output_dim(), L = problem.L;
    if (L < 2) throw ConfigError(std::string(who) + ": L must exceed the lag, so L >= 2");

    long horizon = 0;
    if (unknown_n) {
        horizon = problem.step_cap > 0 ? problem.step_cap : 10 * (m * L + L + 50);
    } else {
        if (!problem.n_known || *problem.n_known < 1) {
            throw ConfigError(std::string(who) + ": n_known is required (>= 1)");
        }
        horizon = *problem.n_known + (m + 1) * L - 1;
    }

    ColumnLayout layout;
    layout.lead_rows = p * (L - 1);
    layout.lead = [&plant, L](long j) { return plant.outputs().stacked(j, j + L - 2); };

    LoopOutcome loop =
        run_depth_loop(plant, problem, layout, unknown_n ? Stopping::UnknownN : Stopping::KnownHorizon, horizon,
                       [] {});

    const long T = loop.stop_t;
    DesignResult result;
    result.log = std::move(loop.log);
    result.log.final.T = T;
    const Index n = unknown_n ? T - (m + 1) * L + 1 : *problem.n_known;
    if (unknown_n) result.log.final.n_recovered = n;
    result.log.final.target_rank = n + m * L;
    result.log.final.final_rank = numerical_rank(io_final_matrix(plant, L, T), problem.tol);
    result.trajectory.u = plant.inputs();
    result.trajectory.y = plant.outputs();
    return result;
}

}  // namespace

std::optional<KernelCertificate> find_certificate(const Matrix& stacked, Index lead_rows, Index m, Index L,
                                                  const Tolerance& tol, double eta_threshold) {
    if (m < 1 || L < 1 || lead_rows < 0 || stacked.rows() != lead_rows + m * L) {
        throw DimensionError("find_certificate: stacked matrix has " + std::to_string(stacked.rows()) +
                             " rows, expected " + std::to_string(lead_rows) + " + " + std::to_string(m) + "*" +
                             std::to_string(L));
    }
    const Matrix kernel = left_kernel_basis(stacked, tol);
    if (kernel.rows() == 0) return std::nullopt;

    // Best unit combination c of kernel rows: the top left singular vector of
    // the eta_1 columns.
    const Matrix eta1_block = kernel.rightCols(m);
    Eigen::JacobiSVD<Matrix> svd(eta1_block, Eigen::ComputeFullU);
    if (svd.singularValues()(0) <= eta_threshold) return std::nullopt;
    Vector w = kernel.transpose() * svd.matrixU().col(0);

    const auto eta1 = w.tail(m);
    Index lead = 0;
    eta1.cwiseAbs().maxCoeff(&lead);
    if (eta1(lead) < 0.0) w = -w;

    KernelCertificate cert;
    cert.m = m;
    cert.xi = w.head(lead_rows);
    cert.eta = w.tail(m * L);
    cert.residual = (w.transpose() * stacked).norm();
    return cert;
}

Vector choose_input(const KernelCertificate& cert, double known_part, const InputPolicy& policy) {
    const Vector eta1 = cert.eta1();
    const double norm = eta1.norm();
    if (!(norm > 0.0)) throw InfeasibleError("choose_input: certificate has eta_1 = 0");
    const double sign = known_part >= 0.0 ? 1.0 : -1.0;
    return sign * policy.delta * eta1 / norm;
}

DesignResult design_input_state(PlantOracle& plant, const DesignProblem& problem) {
    require_exposure(plant, Exposure::State, "design_input_state");
    require_fresh(plant, "design_input_state");
    const Index n = state_dimension(plant, problem, "design_input_state");
    const Index m = plant.input_dim();
    const long T = n + m;
    InputSource source(problem.policy, m);

    Matrix states(n, 0), inputs(m, 0);
    DesignResult result;
    for (long t = 0; t < T; ++t) {
        const Vector x = plant.state();
        DesignStep step;
        step.t = t;
        step.image_residual = image_residual(x, states, problem.tol);
        if (step.image_residual > problem.tol.abs + problem.tol.rel * x.norm()) {
            step.branch = Branch::ImageMiss;
            step.u = source.arbitrary();
        } else {
            auto cert = find_certificate(stack_rows(states, inputs), n, m, 1, problem.tol, problem.eta_threshold);
            if (!cert) {
                throw InfeasibleError("design_input_state: no kernel certificate at t = " + std::to_string(t) +
                                      " (uncontrollable system or tolerance breakdown)");
            }
            const double known = cert->xi.dot(x);
            step.branch = Branch::Certificate;
            step.u = choose_input(*cert, known, problem.policy);
            step.scalar = known + cert->eta1().dot(step.u);
            step.certificate = std::move(cert);
        }
        plant.apply(step.u);
        append_column(states, x);
        append_column(inputs, step.u);
        step.rank_after = numerical_rank(stack_rows(states, inputs), problem.tol);
        result.log.steps.push_back(std::move(step));
    }

    result.log.final.T = T;
    result.log.final.target_rank = n + m;
    result.log.final.final_rank = numerical_rank(stack_rows(states, inputs), problem.tol);
    result.trajectory.u = plant.inputs();
    VectorSeq xs = VectorSeq::from_columns(states);
    xs.push_back(plant.state());
    result.trajectory.x = std::move(xs);
    return result;
}

DesignResult design_input_state_depth(PlantOracle& plant, const DesignProblem& problem) {
    require_exposure(plant, Exposure::State, "design_input_state_depth");
    require_fresh(plant, "design_input_state_depth");
    const Index n = state_dimension(plant, problem, "design_input_state_depth");
    const Index m = plant.input_dim(), L = problem.L;
    if (L < 1) throw ConfigError("design_input_state_depth: L must be >= 1");
    const long T = n + (m + 1) * L - 1;

    VectorSeq states(n);
    ColumnLayout layout;
    layout.lead_rows = n;
    layout.lead = [&states](long j) { return states.at(j); };

    LoopOutcome loop = run_depth_loop(plant, problem, layout, Stopping::KnownHorizon, T,
                                      [&states, &plant] { states.push_back(plant.state()); });

    DesignResult result;
    result.log = std::move(loop.log);
    result.log.final.T = T;
    result.log.final.target_rank = n + m * L;
    result.log.final.final_rank = numerical_rank(loop.stacked, problem.tol);
    result.trajectory.u = plant.inputs();
    states.push_back(plant.state());
    result.trajectory.x = std::move(states);
    return result;
}

DesignResult design_input_output(PlantOracle& plant, const DesignProblem& problem) {
    return output_design(plant, problem, false);
}

DesignResult design_input_output_unknown_n(PlantOracle& plant, const DesignProblem& problem) {
    return output_design(plant, problem, true);
}

PeInput design_pe_baseline(Index m, Index order, Index T, std::uint64_t seed, const Tolerance& tol) {
    if (m < 1 || order < 1) throw ConfigError("design_pe_baseline: m and order must be >= 1");
    if (T < (m + 1) * order - 1) {
        throw ConfigError("design_pe_baseline: T = " + std::to_string(T) + " is below (m+1)*order - 1 = " +
                          std::to_string((m + 1) * order - 1));
    }
    constexpr int kResamples = 10;
    for (int draw = 0; draw <= kResamples; ++draw) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(draw)}));
        PeInput out{VectorSeq(m), draw + 1};
        for (Index t = 0; t < T; ++t) {
            Vector u(m);
            for (Index i = 0; i < m; ++i) u(i) = rng.uniform(-1.0, 1.0);
            out.u.push_back(u);
        }
        if (is_persistently_exciting(out.u, order, tol)) return out;
    }
    throw GenerationError("design_pe_baseline: no persistently exciting draw after 10 resamples");
}

void validate_for_design(const LtiSystem& sys, DesignMode mode, Index L, const Tolerance& tol,
                         bool allow_unobservable) {
    if (!is_controllable(sys, tol)) throw StructureError("design: (A, B) is not controllable");
    const bool output_based = mode == DesignMode::InputOutput || mode == DesignMode::InputOutputUnknownN ||
                              mode == DesignMode::PeBaseline;
    if (!is_observable(sys, tol) && (output_based || !allow_unobservable)) {
        throw StructureError("design: (C, A) is not observable");
    }
    if (mode == DesignMode::InputOutput || mode == DesignMode::InputOutputUnknownN) {
        const Index ell = lag(sys, tol);
        if (L <= ell) {
            throw ConfigError("design: L = " + std::to_string(L) + " must exceed the lag " + std::to_string(ell));
        }
    } else if (mode == DesignMode::PeBaseline) {
        const Index ell = lag(sys, tol);
        if (L < ell) {
            throw ConfigError("design: L = " + std::to_string(L) + " is below the lag " + std::to_string(ell));
        }
    } else if (L < 1) {
        throw ConfigError("design: L must be >= 1");
    }
}

}  // namespace oed
