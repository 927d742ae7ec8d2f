#include "oed/verifier.hpp"

#include <string>

#include "oed/errors.hpp"

namespace oed {

namespace {

RankCheck make_check(const Matrix& stacked, Index target, const Tolerance& tol) {
    RankCheck c;
    c.rank = numerical_rank(stacked, tol);
    c.target = target;
    c.pass = c.rank == c.target;
    return c;
}

Vector candidate_vector(const Trajectory& candidate, Index L) {
    if (!candidate.y) throw DimensionError("check_trajectory_parameterized: candidate has no outputs");
    const VectorSeq& u = candidate.u;
    const VectorSeq& y = *candidate.y;
    if (u.size() != L || y.size() != L) {
        throw DimensionError("check_trajectory_parameterized: candidate must have exactly L = " + std::to_string(L) +
                             " samples");
    }
    Vector v(L * (y.dim() + u.dim()));
    v << y.stacked(y.start_index(), y.end_index()), u.stacked(u.start_index(), u.end_index());
    return v;
}

}  // namespace

RankCheck check_io_rank(const VectorSeq& u, const VectorSeq& y, Index L, Index n, const Tolerance& tol) {
    if (u.size() != y.size()) {
        throw DimensionError("check_io_rank: u has " + std::to_string(u.size()) + " samples, y has " +
                             std::to_string(y.size()));
    }
    return make_check(stack_rows(hankel(y, L), hankel(u, L)), n + u.dim() * L, tol);
}

RankCheck check_is_rank(const VectorSeq& u, const VectorSeq& x, Index n, const Tolerance& tol) {
    return check_is_depth_rank(u, x, 1, n, tol);
}

RankCheck check_is_depth_rank(const VectorSeq& u, const VectorSeq& x, Index L, Index n, const Tolerance& tol) {
    if (x.size() != u.size() && x.size() != u.size() + 1) {
        throw DimensionError("check_is_rank: x has " + std::to_string(x.size()) + " samples for " +
                             std::to_string(u.size()) + " inputs");
    }
    if (L < 1 || L > u.size()) throw DimensionError("check_is_rank: depth out of range");
    const long first = u.start_index();
    const long last = u.end_index();
    const Matrix states = hankel(x, 1, first, last - L + 1);
    return make_check(stack_rows(states, hankel(u, L)), n + u.dim() * L, tol);
}

double parameterization_residual(const Trajectory& candidate, const VectorSeq& bank_u, const VectorSeq& bank_y,
                                 Index L, const Tolerance& tol) {
    if (bank_u.size() != bank_y.size()) throw DimensionError("check_trajectory_parameterized: bank length mismatch");
    if (candidate.u.dim() != bank_u.dim() || !candidate.y || candidate.y->dim() != bank_y.dim()) {
        throw DimensionError("check_trajectory_parameterized: candidate dimensions differ from the bank");
    }
    const Vector v = candidate_vector(candidate, L);
    const Matrix bank = stack_rows(hankel(bank_y, L), hankel(bank_u, L));
    const double scale = v.norm();
    const double r = image_residual(v, bank, tol);
    return scale > 0.0 ? r / scale : r;
}

bool check_trajectory_parameterized(const Trajectory& candidate, const VectorSeq& bank_u, const VectorSeq& bank_y,
                                    Index L, const Tolerance& tol) {
    const Vector v = candidate_vector(candidate, L);
    const Matrix bank = stack_rows(hankel(bank_y, L), hankel(bank_u, L));
    if (candidate.u.dim() != bank_u.dim() || candidate.y->dim() != bank_y.dim()) {
        throw DimensionError("check_trajectory_parameterized: candidate dimensions differ from the bank");
    }
    return in_image(v, bank, tol);
}

Index min_samples(Method method, Index n, Index m, Index L) {
    if (n < 1 || m < 1 || L < 1) throw DimensionError("min_samples: n, m, L must be >= 1");
    switch (method) {
        case Method::OnlineIS: return n + m;
        case Method::OnlineIO: return n + (m + 1) * L - 1;
        case Method::PE: return (m + 1) * (n + L) - 1;
    }
    throw DimensionError("min_samples: unknown method");
}

}  // namespace oed
