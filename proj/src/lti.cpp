#include "oed/lti.hpp"

#include <Eigen/Eigenvalues>
#include <string>

#include "oed/errors.hpp"
#include "oed/random.hpp"

namespace oed {

namespace {

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix random_matrix(Rng& rng, Index rows, Index cols) {
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) out(i, j) = rng.uniform(-1.0, 1.0);
    return out;
}

}  // namespace

LtiSystem::LtiSystem(Matrix a, Matrix b, Matrix c, Matrix d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    const Index n = a_.rows();
    if (n < 1 || a_.cols() != n) throw DimensionError("LtiSystem: A must be square and nonempty, got " + shape(a_));
    if (b_.rows() != n || b_.cols() < 1) throw DimensionError("LtiSystem: B is " + shape(b_));
    if (c_.cols() != n || c_.rows() < 1) throw DimensionError("LtiSystem: C is " + shape(c_));
    if (d_.rows() != c_.rows() || d_.cols() != b_.cols()) throw DimensionError("LtiSystem: D is " + shape(d_));
    require_finite(a_, "A");
    require_finite(b_, "B");
    require_finite(c_, "C");
    require_finite(d_, "D");
}

Trajectory simulate(const LtiSystem& sys, const Vector& x0, const VectorSeq& u) {
    if (x0.size() != sys.n()) throw DimensionError("simulate: x0 has length " + std::to_string(x0.size()));
    if (u.dim() != sys.m()) throw DimensionError("simulate: input dimension " + std::to_string(u.dim()));
    Trajectory traj{u, VectorSeq(sys.n(), u.start_index()), VectorSeq(sys.p(), u.start_index())};
    Vector x = x0;
    for (Index k = 0; k < u.size(); ++k) {
        traj.x->push_back(x);
        traj.y->push_back(sys.C() * x + sys.D() * u[k]);
        x = sys.A() * x + sys.B() * u[k];
    }
    traj.x->push_back(x);
    return traj;
}

Matrix observability_matrix(const LtiSystem& sys, Index i) {
    if (i < 1) throw DimensionError("observability_matrix: i must be >= 1");
    const Index p = sys.p();
    Matrix o(p * i, sys.n());
    o.topRows(p) = sys.C();
    for (Index k = 1; k < i; ++k) o.middleRows(k * p, p) = o.middleRows((k - 1) * p, p) * sys.A();
    return o;
}

Matrix controllability_matrix(const LtiSystem& sys) {
    const Index n = sys.n(), m = sys.m();
    Matrix k(n, n * m);
    k.leftCols(m) = sys.B();
    for (Index i = 1; i < n; ++i) k.middleCols(i * m, m) = sys.A() * k.middleCols((i - 1) * m, m);
    return k;
}

Index lag(const LtiSystem& sys, const Tolerance& tol) {
    for (Index i = 1; i <= sys.n(); ++i) {
        if (numerical_rank(observability_matrix(sys, i), tol) == sys.n()) return i;
    }
    throw StructureError("lag: (C, A) is not observable");
}

Matrix toeplitz_markov(const LtiSystem& sys, Index i) {
    if (i < 1) throw DimensionError("toeplitz_markov: i must be >= 1");
    const Index p = sys.p(), m = sys.m();
    Matrix t = Matrix::Zero(p * i, m * i);
    // markov[k] = C A^{k-1} B for k >= 1
    Matrix power_b = sys.B();
    for (Index k = 0; k < i; ++k) {
        const Matrix block = k == 0 ? sys.D() : Matrix(sys.C() * power_b);
        if (k > 0) power_b = sys.A() * power_b;
        for (Index c = 0; c + k < i; ++c) t.block((c + k) * p, c * m, p, m) = block;
    }
    return t;
}

NMPair stacked_NM(const LtiSystem& sys, Index L) {
    if (L < 2) throw DimensionError("stacked_NM: L must be >= 2");
    const Index n = sys.n(), m = sys.m(), p = sys.p(), k = L - 1;
    Matrix big_n = Matrix::Zero(p * k + m * k, n + m * k);
    big_n.topLeftCorner(p * k, n) = observability_matrix(sys, k);
    big_n.topRightCorner(p * k, m * k) = toeplitz_markov(sys, k);
    big_n.bottomRightCorner(m * k, m * k).setIdentity();
    Matrix big_m = Matrix::Zero(big_n.rows() + m, big_n.cols() + m);
    big_m.topLeftCorner(big_n.rows(), big_n.cols()) = big_n;
    big_m.bottomRightCorner(m, m).setIdentity();
    return {std::move(big_n), std::move(big_m)};
}

bool is_controllable(const LtiSystem& sys, const Tolerance& tol) {
    return numerical_rank(controllability_matrix(sys), tol) == sys.n();
}

bool is_observable(const LtiSystem& sys, const Tolerance& tol) {
    return numerical_rank(observability_matrix(sys, sys.n()), tol) == sys.n();
}

double spectral_radius(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return Eigen::EigenSolver<Matrix>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

LtiSystem random_minimal_system(Index n, Index m, Index p, double spectral_cap,
                                std::uint64_t seed, const Tolerance& tol) {
    if (n < 1 || m < 1 || p < 1) throw DimensionError("random_minimal_system: n, m, p must be >= 1");
    if (!(spectral_cap > 0.0)) throw ConfigError("random_minimal_system: spectral_cap must be positive");
    Rng rng(seed);
    constexpr int kAttempts = 100;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        Matrix a = random_matrix(rng, n, n);
        Matrix b = random_matrix(rng, n, m);
        Matrix c = random_matrix(rng, p, n);
        Matrix d = random_matrix(rng, p, m);
        const double rho = spectral_radius(a);
        if (rho > 0.0) a *= spectral_cap / rho;
        LtiSystem sys(std::move(a), std::move(b), std::move(c), std::move(d));
        if (is_minimal(sys, tol)) return sys;
    }
    throw GenerationError("random_minimal_system: no minimal system in 100 draws");
}

Vector random_initial_state(Index n, std::uint64_t seed) {
    Rng rng(seed);
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
    return x;
}

PlantOracle::PlantOracle(LtiSystem sys, Vector x0, Exposure exposure)
    : sys_(std::move(sys)), exposure_(exposure), x_(std::move(x0)) {
    if (x_.size() != sys_.n()) throw DimensionError("PlantOracle: x0 has length " + std::to_string(x_.size()));
    require_finite(x_, "x0");
    record_.u = VectorSeq(sys_.m());
    record_.x = VectorSeq(sys_.n());
    record_.y = VectorSeq(sys_.p());
    record_.x->push_back(x_);
}

Index PlantOracle::state_dim() const {
    if (exposure_ != Exposure::State) throw ConfigError("PlantOracle: state dimension hidden in output mode");
    return sys_.n();
}

const Vector& PlantOracle::state() const {
    if (exposure_ != Exposure::State) throw ConfigError("PlantOracle: state hidden in output mode");
    return x_;
}

const VectorSeq& PlantOracle::outputs() const {
    if (exposure_ != Exposure::Output) throw ConfigError("PlantOracle: outputs not exposed in state mode");
    return *record_.y;
}

void PlantOracle::apply(const Vector& u) {
    if (u.size() != sys_.m()) throw DimensionError("PlantOracle: input of length " + std::to_string(u.size()));
    record_.u.push_back(u);
    record_.y->push_back(sys_.C() * x_ + sys_.D() * u);
    x_ = sys_.A() * x_ + sys_.B() * u;
    record_.x->push_back(x_);
}

}  // namespace oed
