#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oed/lti.hpp"
#include "oed/matlin.hpp"

namespace oed {

/// How "arbitrary" inputs are produced and how certificate inputs are scaled.
///
/// - FirstBasis: arbitrary inputs are delta * e1, initial filler inputs are 0.
/// - NormConstrained: every input has norm exactly delta (filler is delta * e1).
/// - SeededRandom: arbitrary inputs are seeded random vectors of norm <= delta.
///
/// In the certificate branch all modes use u = s * delta * eta1 / |eta1|.
enum class PolicyMode { FirstBasis, NormConstrained, SeededRandom };

struct InputPolicy {
    PolicyMode mode = PolicyMode::FirstBasis;
    double delta = 1.0;
    std::uint64_t seed = 0;
};

/// Left-kernel vector (xi, eta_L, ..., eta_1) of a stacked Hankel matrix with
/// eta_1 != 0. `eta` holds eta_L first and eta_1 last.
struct KernelCertificate {
    Vector xi;
    Vector eta;
    Index m = 0;
    /// |w^T S| for the concatenated row w.
    double residual = 0.0;

    Vector eta1() const { return eta.tail(m); }
    Vector row() const;
};

enum class Branch { ImageMiss, Certificate };

struct DesignStep {
    long t = 0;
    Branch branch = Branch::ImageMiss;
    std::optional<KernelCertificate> certificate;
    Vector u;
    /// Certificate row applied to the new column (certificate branch only).
    std::optional<double> scalar;
    Index rank_after = 0;
    /// Least-squares residual of the image-membership test that picked the branch.
    double image_residual = 0.0;
};

struct DesignSummary {
    Index T = 0;
    Index final_rank = 0;
    Index target_rank = 0;
    std::optional<Index> n_recovered;
};

struct DesignLog {
    std::vector<DesignStep> steps;
    DesignSummary final;
};

struct DesignProblem {
    Index L = 1;
    /// Absent selects the unknown-n stopping rule (output designs only).
    std::optional<Index> n_known;
    InputPolicy policy;
    Tolerance tol;
    /// A certificate exists when the best achievable |eta_1| exceeds this.
    double eta_threshold = 1e-8;
    /// Unknown-n runaway guard; 0 selects 10 * (m L + L + 50).
    long step_cap = 0;
};

struct DesignResult {
    Trajectory trajectory;
    DesignLog log;
};

/// Input/state design with T = n + m samples; final [H1(x); H1(u)] is square
/// and nonsingular. Plant must expose its state.
DesignResult design_input_state(PlantOracle& plant, const DesignProblem& problem);

/// Input/state design of depth L with T = n + (m+1)L - 1; final
/// [H1(x_[0,T-L]); H_L(u_[0,T-1])] has rank n + mL. Reduces to
/// design_input_state for L = 1.
DesignResult design_input_state_depth(PlantOracle& plant, const DesignProblem& problem);

/// Input/output design for L > lag with T = n + (m+1)L - 1; final
/// [H_L(y); H_L(u)] has rank n + mL. Requires problem.n_known.
DesignResult design_input_output(PlantOracle& plant, const DesignProblem& problem);

/// Input/output design without knowledge of n: runs until the image test
/// passes but no certificate exists, then reports n = t - (m+1)L + 1.
DesignResult design_input_output_unknown_n(PlantOracle& plant, const DesignProblem& problem);

/// Certificate for `stacked` = [lead block; H_L(u)] with `lead_rows` leading
/// rows. Picks the left-kernel combination maximizing |eta_1|; none when the
/// kernel is empty or that maximum is <= eta_threshold.
std::optional<KernelCertificate> find_certificate(const Matrix& stacked, Index lead_rows, Index m, Index L,
                                                  const Tolerance& tol = {}, double eta_threshold = 1e-8);

/// u = s * delta * eta1 / |eta1| with the sign s maximizing |known_part + eta1^T u|.
Vector choose_input(const KernelCertificate& cert, double known_part, const InputPolicy& policy);

struct PeInput {
    VectorSeq u;
    /// Number of draws made (1 when the first draw was already exciting).
    int draws = 0;
};

/// Seeded uniform(-1, 1) input of length T, redrawn (at most 10 times) until it
/// is persistently exciting of the given order. Requires T >= (m+1) order - 1.
PeInput design_pe_baseline(Index m, Index order, Index T, std::uint64_t seed, const Tolerance& tol = {});

enum class DesignMode { InputState, InputStateDepth, InputOutput, InputOutputUnknownN, PeBaseline };

/// Structural preconditions of a design, checked against a known system:
/// controllability always, observability for output designs (and for state
/// designs unless `allow_unobservable`), L > lag for output designs.
/// Throws StructureError or ConfigError.
void validate_for_design(const LtiSystem& sys, DesignMode mode, Index L, const Tolerance& tol = {},
                         bool allow_unobservable = false);

}  // namespace oed
