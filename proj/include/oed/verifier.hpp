#pragma once

#include "oed/lti.hpp"
#include "oed/matlin.hpp"

namespace oed {

struct RankCheck {
    Index rank = 0;
    Index target = 0;
    bool pass = false;
};

/// rank [H_L(y); H_L(u)] against n + mL.
RankCheck check_io_rank(const VectorSeq& u, const VectorSeq& y, Index L, Index n, const Tolerance& tol = {});

/// rank [H1(x); H1(u)] against n + m. x may carry one extra terminal sample,
/// which is ignored.
RankCheck check_is_rank(const VectorSeq& u, const VectorSeq& x, Index n, const Tolerance& tol = {});

/// rank [H1(x_[0,T-L]); H_L(u_[0,T-1])] against n + mL (depth-L state data).
RankCheck check_is_depth_rank(const VectorSeq& u, const VectorSeq& x, Index L, Index n,
                              const Tolerance& tol = {});

/// Relative least-squares residual of the stacked candidate (y, u) against
/// the column image of [H_L(y_bank); H_L(u_bank)].
double parameterization_residual(const Trajectory& candidate, const VectorSeq& bank_u, const VectorSeq& bank_y,
                                 Index L, const Tolerance& tol = {});

/// True iff the length-L candidate trajectory lies in the image of the bank's
/// stacked Hankel matrix.
bool check_trajectory_parameterized(const Trajectory& candidate, const VectorSeq& bank_u, const VectorSeq& bank_y,
                                    Index L, const Tolerance& tol = {});

enum class Method { OnlineIS, OnlineIO, PE };

/// Samples each approach needs: n + m, n + (m+1)L - 1, (m+1)(n+L) - 1.
Index min_samples(Method method, Index n, Index m, Index L);

/// Exact rank of an integer-valued matrix (|entries| <= 1e6, at most 16x16)
/// by fraction-free elimination in 128-bit integers. Throws OracleError on
/// non-integer entries, oversize input or overflow.
Index exact_rank_oracle(const Matrix& m);

}  // namespace oed
