#include <complex>

#include "doctest.h"
#include "oed/errors.hpp"
#include "oed/lti.hpp"
#include "oed/random.hpp"

using namespace oed;

namespace {

Matrix mat(Index rows, Index cols, std::initializer_list<double> values) {
    Matrix m(rows, cols);
    auto it = values.begin();
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = *it++;
    return m;
}

LtiSystem two_state() {
    return LtiSystem(mat(2, 2, {1, 1, 0, -1}), mat(2, 1, {0, 1}), Matrix::Identity(2, 2), Matrix::Zero(2, 1));
}

// Shift-register pair: observable from the first coordinate only after two steps.
LtiSystem nilpotent_siso() {
    return LtiSystem(mat(2, 2, {0, 1, 0, 0}), mat(2, 1, {0, 1}), mat(1, 2, {1, 0}), Matrix::Zero(1, 1));
}

VectorSeq random_inputs(Rng& rng, Index m, Index len) {
    VectorSeq u(m);
    for (Index t = 0; t < len; ++t) {
        Vector v(m);
        for (Index i = 0; i < m; ++i) v(i) = rng.uniform(-1, 1);
        u.push_back(v);
    }
    return u;
}

// Popov-Belevitch-Hautus test: rank [A - lambda I, B] = n at every eigenvalue.
bool pbh_controllable(const LtiSystem& sys) {
    using CMatrix = Eigen::MatrixXcd;
    const Index n = sys.n();
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Matrix>(sys.A(), false).eigenvalues();
    for (Index k = 0; k < n; ++k) {
        CMatrix pencil(n, n + sys.m());
        pencil.leftCols(n) = sys.A().cast<std::complex<double>>() - eig(k) * CMatrix::Identity(n, n);
        pencil.rightCols(sys.m()) = sys.B().cast<std::complex<double>>();
        Eigen::JacobiSVD<CMatrix> svd(pencil);
        const Eigen::VectorXd s = svd.singularValues();
        if (s(n - 1) <= 1e-9 * std::max(1.0, s(0))) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("LtiSystem validation") {
    CHECK_THROWS_AS(LtiSystem(Matrix::Zero(2, 3), Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1)),
                    DimensionError);
    CHECK_THROWS_AS(LtiSystem(Matrix::Zero(2, 2), Matrix::Zero(3, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1)),
                    DimensionError);
    CHECK_THROWS_AS(LtiSystem(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(2, 1)),
                    DimensionError);
    Matrix a = Matrix::Zero(2, 2);
    a(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(LtiSystem(a, Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1)), NonFiniteError);
}

TEST_CASE("simulate") {
    SUBCASE("integrator step") {
        const LtiSystem sys(Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Zero(2, 2));
        VectorSeq u(2);
        u.push_back(Eigen::Vector2d(1, 0));
        const Trajectory tr = simulate(sys, Vector::Zero(2), u);
        CHECK(tr.x->at(1) == Vector(Eigen::Vector2d(1, 0)));
        CHECK(tr.y->at(0) == Vector(Eigen::Vector2d(0, 0)));
    }
    SUBCASE("frozen state") {
        const LtiSystem sys(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Identity(2, 2), Matrix::Zero(2, 1));
        const Vector v = Eigen::Vector2d(0.5, -2);
        const Trajectory tr = simulate(sys, v, VectorSeq::scalar({3, -1, 7}));
        REQUIRE(tr.x->size() == 4);
        for (long t = 0; t <= 3; ++t) CHECK(tr.x->at(t) == v);
    }
    SUBCASE("two-state hand iteration") {
        const Trajectory tr = simulate(two_state(), Eigen::Vector2d(0, 1), VectorSeq::scalar({1, 0, 1}));
        REQUIRE(tr.x->size() == 4);
        CHECK(tr.x->at(0) == Vector(Eigen::Vector2d(0, 1)));
        CHECK(tr.x->at(1) == Vector(Eigen::Vector2d(1, 0)));
        CHECK(tr.x->at(2) == Vector(Eigen::Vector2d(1, 0)));
        CHECK(tr.x->at(3) == Vector(Eigen::Vector2d(1, 1)));
        CHECK(tr.y->size() == 3);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(simulate(two_state(), Vector::Zero(3), VectorSeq::scalar({1})), DimensionError);
        CHECK_THROWS_AS(simulate(two_state(), Vector::Zero(2), VectorSeq(2)), DimensionError);
    }
}

TEST_CASE("simulate obeys the state and output equations (property)") {
    for (std::uint64_t k = 0; k < 30; ++k) {
        Rng rng(derive_seed(400, {k}));
        const Index n = rng.integer(1, 6), m = rng.integer(1, 3), p = rng.integer(1, 3);
        const LtiSystem sys = random_minimal_system(n, m, p, 1.0, derive_seed(401, {k}));
        const Vector x0 = random_initial_state(n, derive_seed(402, {k}));
        const VectorSeq u = random_inputs(rng, m, rng.integer(1, 15));
        const Trajectory tr = simulate(sys, x0, u);
        REQUIRE(tr.x->size() == u.size() + 1);
        for (long t = 0; t < static_cast<long>(u.size()); ++t) {
            const Vector xn = sys.A() * tr.x->at(t) + sys.B() * u.at(t);
            const Vector yt = sys.C() * tr.x->at(t) + sys.D() * u.at(t);
            CHECK((tr.x->at(t + 1) - xn).norm() <= 1e-12 * std::max(1.0, xn.norm()));
            CHECK((tr.y->at(t) - yt).norm() <= 1e-12 * std::max(1.0, yt.norm()));
        }
    }
}

TEST_CASE("observability_matrix and lag") {
    CHECK(observability_matrix(two_state(), 1) == Matrix::Identity(2, 2));
    CHECK(observability_matrix(nilpotent_siso(), 2) == Matrix::Identity(2, 2));
    const LtiSystem sys = random_minimal_system(4, 2, 3, 1.0, 17);
    CHECK(observability_matrix(sys, 1) == sys.C());
    CHECK(observability_matrix(sys, 3).rows() == 9);

    CHECK(lag(two_state()) == 1);
    CHECK(lag(nilpotent_siso()) == 2);
    CHECK(lag(LtiSystem(mat(1, 1, {0.5}), mat(1, 1, {1}), mat(1, 1, {2}), mat(1, 1, {0}))) == 1);

    const LtiSystem unobservable(Matrix::Identity(2, 2), Matrix::Identity(2, 2), mat(1, 2, {1, 0}),
                                 Matrix::Zero(1, 2));
    CHECK_FALSE(is_observable(unobservable));
    CHECK_THROWS_AS(lag(unobservable), StructureError);
}

TEST_CASE("lag is at most n, and 1 exactly when C has rank n (property)") {
    for (std::uint64_t k = 0; k < 60; ++k) {
        Rng rng(derive_seed(500, {k}));
        const Index n = rng.integer(1, 7), p = rng.integer(1, 4);
        const LtiSystem sys = random_minimal_system(n, 1, p, 1.0, derive_seed(501, {k}));
        const Index l = lag(sys);
        CHECK(l <= n);
        CHECK((l == 1) == (numerical_rank(sys.C()) == n));
        CHECK(numerical_rank(observability_matrix(sys, l)) == n);
        if (l > 1) CHECK(numerical_rank(observability_matrix(sys, l - 1)) < n);
    }
}

TEST_CASE("toeplitz_markov") {
    const LtiSystem sys = random_minimal_system(3, 2, 2, 1.0, 23);
    CHECK(toeplitz_markov(sys, 1) == sys.D());
    const Matrix t2 = toeplitz_markov(sys, 2);
    REQUIRE(t2.rows() == 4);
    REQUIRE(t2.cols() == 4);
    CHECK(t2.topLeftCorner(2, 2) == sys.D());
    CHECK(t2.topRightCorner(2, 2) == Matrix::Zero(2, 2));
    CHECK(t2.bottomLeftCorner(2, 2).isApprox(sys.C() * sys.B()));
    CHECK(t2.bottomRightCorner(2, 2) == sys.D());

    const Matrix d = mat(2, 1, {1, -2});
    const LtiSystem frozen(Matrix::Identity(3, 3), Matrix::Zero(3, 1), Matrix::Ones(2, 3), d);
    const Matrix t3 = toeplitz_markov(frozen, 3);
    Matrix expected = Matrix::Zero(6, 3);
    for (Index k = 0; k < 3; ++k) expected.block(2 * k, k, 2, 1) = d;
    CHECK(t3 == expected);
}

TEST_CASE("outputs factor through the observability and Toeplitz matrices (property)") {
    for (std::uint64_t k = 0; k < 30; ++k) {
        Rng rng(derive_seed(600, {k}));
        const Index n = rng.integer(1, 6), m = rng.integer(1, 3), p = rng.integer(1, 3), L = rng.integer(1, 8);
        const LtiSystem sys = random_minimal_system(n, m, p, 1.0, derive_seed(601, {k}));
        const Vector x0 = random_initial_state(n, derive_seed(602, {k}));
        const VectorSeq u = random_inputs(rng, m, L);
        const Trajectory tr = simulate(sys, x0, u);
        const Vector predicted = observability_matrix(sys, L) * x0 + toeplitz_markov(sys, L) * u.stacked(0, L - 1);
        CHECK((tr.y->stacked(0, L - 1) - predicted).norm() <= 1e-10 * std::max(1.0, predicted.norm()));
    }
}

TEST_CASE("stacked_NM") {
    SUBCASE("full state measurement, L = 2") {
        const NMPair nm = stacked_NM(two_state(), 2);
        CHECK(nm.N == Matrix::Identity(3, 3));
        CHECK(nm.M == Matrix::Identity(4, 4));
    }
    SUBCASE("M appends m columns") {
        const LtiSystem sys = random_minimal_system(3, 2, 1, 1.0, 31);
        const NMPair nm = stacked_NM(sys, 4);
        CHECK(nm.M.cols() == nm.N.cols() + 2);
        CHECK(nm.M.rows() == nm.N.rows() + 2);
    }
    SUBCASE("L < 2 rejected") { CHECK_THROWS_AS(stacked_NM(two_state(), 1), DimensionError); }
    SUBCASE("N maps past state and inputs to past outputs and inputs") {
        const LtiSystem sys = random_minimal_system(3, 2, 2, 1.0, 37);
        Rng rng(38);
        const Index L = 4;
        const Vector x0 = random_initial_state(3, 39);
        const VectorSeq u = random_inputs(rng, 2, L - 1);
        const Trajectory tr = simulate(sys, x0, u);
        Vector arg(3 + u.stacked(0, L - 2).size());
        arg << x0, u.stacked(0, L - 2);
        Vector expected(tr.y->stacked(0, L - 2).size() + u.stacked(0, L - 2).size());
        expected << tr.y->stacked(0, L - 2), u.stacked(0, L - 2);
        CHECK((stacked_NM(sys, L).N * arg - expected).norm() <= 1e-12);
    }
}

TEST_CASE("N has full column rank once L exceeds the lag (property)") {
    for (std::uint64_t k = 0; k < 20; ++k) {
        Rng rng(derive_seed(700, {k}));
        const Index n = rng.integer(1, 6), m = rng.integer(1, 3), p = rng.integer(1, 3);
        const LtiSystem sys = random_minimal_system(n, m, p, 1.0, derive_seed(701, {k}));
        const Index L = lag(sys) + 1;
        const NMPair nm = stacked_NM(sys, L);
        CHECK(numerical_rank(nm.N) == n + m * (L - 1));
        CHECK(numerical_rank(nm.M) == n + m * L);
    }
}

TEST_CASE("controllability") {
    CHECK(is_controllable(two_state()));
    CHECK(controllability_matrix(two_state()) == mat(2, 2, {0, 1, 1, -1}));
    CHECK_FALSE(is_controllable(LtiSystem(mat(2, 2, {1, 1, 0, -1}), Matrix::Zero(2, 1), Matrix::Identity(2, 2),
                                          Matrix::Zero(2, 1))));
    const LtiSystem sys = random_minimal_system(4, 1, 1, 1.0, 41);
    CHECK(is_observable(LtiSystem(sys.A(), sys.B(), Matrix::Identity(4, 4), Matrix::Zero(4, 1))));
}

TEST_CASE("Kalman controllability agrees with the PBH test (property)") {
    int uncontrollable = 0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        Rng rng(derive_seed(800, {k}));
        const Index n = rng.integer(2, 6), m = rng.integer(1, 2);
        Matrix a(n, n), b(n, m);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) a(i, j) = rng.uniform(-1, 1);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < m; ++j) b(i, j) = rng.uniform(-1, 1);
        if (k % 2 == 1) {
            // decouple a trailing block the input cannot reach
            const Index split = rng.integer(1, n - 1);
            a.bottomLeftCorner(n - split, split).setZero();
            b.bottomRows(n - split).setZero();
        }
        const LtiSystem sys(a, b, Matrix::Identity(n, n), Matrix::Zero(n, m));
        const bool kalman = is_controllable(sys);
        if (!kalman) ++uncontrollable;
        CHECK(kalman == pbh_controllable(sys));
    }
    CHECK(uncontrollable == 25);
}

TEST_CASE("random_minimal_system") {
    CHECK(random_minimal_system(3, 2, 2, 1.0, 99) == random_minimal_system(3, 2, 2, 1.0, 99));
    CHECK_FALSE(random_minimal_system(3, 2, 2, 1.0, 99) == random_minimal_system(3, 2, 2, 1.0, 100));
    CHECK_THROWS_AS(random_minimal_system(0, 1, 1, 1.0, 1), DimensionError);
    CHECK_THROWS_AS(random_minimal_system(2, 1, 1, 0.0, 1), ConfigError);
    CHECK(random_initial_state(4, 5) == random_initial_state(4, 5));

    for (std::uint64_t k = 0; k < 200; ++k) {
        Rng rng(derive_seed(900, {k}));
        const Index n = rng.integer(1, 8), m = rng.integer(1, 3), p = rng.integer(1, 3);
        const double cap = k % 4 == 0 ? 0.5 : 1.0;
        const LtiSystem sys = random_minimal_system(n, m, p, cap, derive_seed(901, {k}));
        CHECK(sys.n() == n);
        CHECK(sys.m() == m);
        CHECK(sys.p() == p);
        CHECK(is_controllable(sys));
        CHECK(is_observable(sys));
        CHECK(spectral_radius(sys.A()) <= cap + 1e-9);
    }
}

TEST_CASE("PlantOracle exposure") {
    SUBCASE("state mode") {
        PlantOracle plant(two_state(), Eigen::Vector2d(0, 1), Exposure::State);
        CHECK(plant.state_dim() == 2);
        CHECK(plant.state() == Vector(Eigen::Vector2d(0, 1)));
        CHECK_THROWS_AS(plant.outputs(), ConfigError);
        plant.apply(Vector::Ones(1));
        CHECK(plant.time() == 1);
        CHECK(plant.state() == Vector(Eigen::Vector2d(1, 0)));
        CHECK_THROWS_AS(plant.apply(Vector::Ones(2)), DimensionError);
    }
    SUBCASE("output mode") {
        PlantOracle plant(nilpotent_siso(), Eigen::Vector2d(3, 4), Exposure::Output);
        CHECK_THROWS_AS(plant.state(), ConfigError);
        CHECK_THROWS_AS(plant.state_dim(), ConfigError);
        CHECK(plant.outputs().empty());
        plant.apply(Vector::Zero(1));
        plant.apply(Vector::Zero(1));
        CHECK(plant.outputs() == VectorSeq::scalar({3, 4}));
        CHECK(plant.hidden_record().x->size() == 3);
    }
    SUBCASE("x0 length") {
        CHECK_THROWS_AS(PlantOracle(two_state(), Vector::Zero(3), Exposure::State), DimensionError);
    }
}
