#pragma once

#include <cstdint>
#include <optional>

#include "oed/matlin.hpp"

namespace oed {

/// Discrete-time state-space model x(t+1) = A x(t) + B u(t), y(t) = C x(t) + D u(t).
/// Immutable; dimensions are validated on construction.
class LtiSystem {
public:
    LtiSystem(Matrix a, Matrix b, Matrix c, Matrix d);

    const Matrix& A() const { return a_; }
    const Matrix& B() const { return b_; }
    const Matrix& C() const { return c_; }
    const Matrix& D() const { return d_; }

    Index n() const { return a_.rows(); }
    Index m() const { return b_.cols(); }
    Index p() const { return c_.rows(); }

    friend bool operator==(const LtiSystem&, const LtiSystem&) = default;

private:
    Matrix a_, b_, c_, d_;
};

/// Aligned input/state/output record. When present, x holds one sample more
/// than u (the terminal state).
struct Trajectory {
    VectorSeq u;
    std::optional<VectorSeq> x;
    std::optional<VectorSeq> y;

    long t0() const { return u.start_index(); }
    Index length() const { return u.size(); }
};

Trajectory simulate(const LtiSystem& sys, const Vector& x0, const VectorSeq& u);

/// [C; CA; ...; CA^{i-1}]
Matrix observability_matrix(const LtiSystem& sys, Index i);

/// [B, AB, ..., A^{n-1}B]
Matrix controllability_matrix(const LtiSystem& sys);

/// Smallest i such that the i-block observability matrix has rank n.
/// Throws StructureError for unobservable pairs.
Index lag(const LtiSystem& sys, const Tolerance& tol = {});

/// Lower block-triangular (p i) x (m i) matrix of Markov parameters:
/// D on the diagonal, C A^{k-1} B on block subdiagonal k.
Matrix toeplitz_markov(const LtiSystem& sys, Index i);

/// N maps (x(t-L+1), u_[t-L+1,t-1]) to (y_[t-L+1,t-1], u_[t-L+1,t-1]);
/// M = blockdiag(N, I_m) appends the current input unchanged.
struct NMPair {
    Matrix N;
    Matrix M;
};

/// Requires L >= 2.
NMPair stacked_NM(const LtiSystem& sys, Index L);

bool is_controllable(const LtiSystem& sys, const Tolerance& tol = {});
bool is_observable(const LtiSystem& sys, const Tolerance& tol = {});
inline bool is_minimal(const LtiSystem& sys, const Tolerance& tol = {}) {
    return is_controllable(sys, tol) && is_observable(sys, tol);
}

double spectral_radius(const Matrix& a);

/// Seeded random system with i.i.d. uniform(-1, 1) entries and A rescaled to
/// spectral radius `spectral_cap`. Redraws until controllable and observable
/// (at most 100 attempts, then GenerationError).
LtiSystem random_minimal_system(Index n, Index m, Index p, double spectral_cap,
                                std::uint64_t seed, const Tolerance& tol = {});

/// i.i.d. uniform(-1, 1) vector of length n.
Vector random_initial_state(Index n, std::uint64_t seed);

enum class Exposure { State, Output };

/// Black-box plant used by the online designers. Time advances only through
/// apply(); in State mode x(t) is readable before u(t) is committed, in Output
/// mode only y(0..t-1) and u(0..t-1) are.
class PlantOracle {
public:
    PlantOracle(LtiSystem sys, Vector x0, Exposure exposure);

    Exposure exposure() const { return exposure_; }
    Index input_dim() const { return sys_.m(); }
    Index output_dim() const { return sys_.p(); }
    /// State mode only.
    Index state_dim() const;

    /// Current time t (number of inputs applied so far).
    long time() const { return static_cast<long>(record_.u.size()); }

    /// x(t). State mode only.
    const Vector& state() const;
    /// y(0..t-1). Output mode only.
    const VectorSeq& outputs() const;
    const VectorSeq& inputs() const { return record_.u; }

    /// Commits u(t) and advances to t + 1.
    void apply(const Vector& u);

    /// Full hidden record (u, x including the current state, y). For test and
    /// reporting code; designers must not read it.
    const Trajectory& hidden_record() const { return record_; }
    const LtiSystem& hidden_system() const { return sys_; }

private:
    LtiSystem sys_;
    Exposure exposure_;
    Vector x_;
    Trajectory record_;
};

}  // namespace oed
