#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "oed/errors.hpp"
#include "oed/verifier.hpp"

namespace oed {

namespace {

using Wide = __int128;

Wide mul(Wide a, Wide b) {
    Wide r;
    if (__builtin_mul_overflow(a, b, &r)) throw OracleError("exact_rank_oracle: 128-bit overflow");
    return r;
}

Wide sub(Wide a, Wide b) {
    Wide r;
    if (__builtin_sub_overflow(a, b, &r)) throw OracleError("exact_rank_oracle: 128-bit overflow");
    return r;
}

}  // namespace

Index exact_rank_oracle(const Matrix& m) {
    constexpr Index kMaxDim = 16;
    constexpr double kMaxEntry = 1e6;
    if (m.rows() > kMaxDim || m.cols() > kMaxDim) {
        throw OracleError("exact_rank_oracle: matrix larger than 16x16");
    }
    const Index rows = m.rows(), cols = m.cols();
    std::vector<std::vector<Wide>> a(static_cast<std::size_t>(rows), std::vector<Wide>(static_cast<std::size_t>(cols)));
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            const double v = m(i, j);
            if (!std::isfinite(v) || v != std::round(v) || std::abs(v) > kMaxEntry) {
                throw OracleError("exact_rank_oracle: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") is not an integer of magnitude <= 1e6");
            }
            a[i][j] = static_cast<Wide>(v);
        }
    }

    // Bareiss elimination: every division below is exact.
    Wide prev_pivot = 1;
    Index rank = 0;
    for (Index col = 0; col < cols && rank < rows; ++col) {
        Index pivot = rank;
        while (pivot < rows && a[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(a[pivot], a[rank]);
        for (Index i = rank + 1; i < rows; ++i) {
            for (Index j = col + 1; j < cols; ++j) {
                a[i][j] = sub(mul(a[rank][col], a[i][j]), mul(a[i][col], a[rank][j])) / prev_pivot;
            }
            a[i][col] = 0;
        }
        prev_pivot = a[rank][col];
        ++rank;
    }
    return rank;
}

}  // namespace oed
