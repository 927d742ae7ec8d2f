#pragma once

#include <Eigen/Dense>
#include <vector>

namespace oed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Rank decisions: a singular value counts when
/// sigma > rel * sigma_max * max(rows, cols) + abs.
/// Image membership accepts residuals up to abs + rel * |v|.
struct Tolerance {
    double rel = 1e-11;
    double abs = 1e-13;
};

/// A finite window of a vector-valued signal, indexed by absolute time.
class VectorSeq {
public:
    VectorSeq() = default;
    explicit VectorSeq(Index dim, long start_index = 0);
    VectorSeq(Index dim, std::vector<Vector> samples, long start_index = 0);

    /// Scalar convenience: one sample per entry of `values`.
    static VectorSeq scalar(const std::vector<double>& values, long start_index = 0);
    /// Column j of `columns` becomes the sample at time start_index + j.
    static VectorSeq from_columns(const Matrix& columns, long start_index = 0);

    Index dim() const { return dim_; }
    Index size() const { return static_cast<Index>(samples_.size()); }
    bool empty() const { return samples_.empty(); }
    long start_index() const { return start_; }
    /// Time index of the last sample (start_index - 1 when empty).
    long end_index() const { return start_ + static_cast<long>(samples_.size()) - 1; }

    /// Sample at absolute time t.
    const Vector& at(long t) const;
    /// Sample by position (0-based).
    const Vector& operator[](Index pos) const { return samples_[static_cast<std::size_t>(pos)]; }

    void push_back(const Vector& v);

    /// Restriction to times [first, last].
    VectorSeq window(long first, long last) const;
    /// Samples at times first..last stacked into one vector (empty if last < first).
    Vector stacked(long first, long last) const;
    /// dim x size matrix of samples.
    Matrix as_columns() const;

    const std::vector<Vector>& samples() const { return samples_; }

    friend bool operator==(const VectorSeq& a, const VectorSeq& b);

private:
    Index dim_ = 0;
    long start_ = 0;
    std::vector<Vector> samples_;
};

/// Block Hankel matrix of depth `depth` over all samples of f:
/// (depth * dim) x (size - depth + 1), block (r, c) = f(start + r + c).
/// Throws DimensionError unless 1 <= depth <= size.
Matrix hankel(const VectorSeq& f, Index depth);

/// Hankel matrix of depth `depth` over the window f_[first, last]. Degenerate
/// shapes are allowed: depth 0 yields zero rows, a window shorter than the
/// depth yields zero columns. Every accessed sample must exist.
Matrix hankel(const VectorSeq& f, Index depth, long first, long last);

/// Vertical concatenation; column counts must agree.
Matrix stack_rows(const Matrix& top, const Matrix& bottom);

/// Singular values in decreasing order (empty for empty matrices).
Vector singular_values(const Matrix& m);

/// Cut-off below which singular values are treated as zero.
double rank_threshold(const Matrix& m, const Vector& sigma, const Tolerance& tol);

Index numerical_rank(const Matrix& m, const Tolerance& tol = {});

/// Orthonormal basis of { w : w^T M = 0 } as rows of a (rows - rank) x rows
/// matrix. A matrix without columns has the identity as its left kernel.
Matrix left_kernel_basis(const Matrix& m, const Tolerance& tol = {});

/// Least-squares residual min_z |M z - v|, computed on the numerically
/// retained column space of M.
double image_residual(const Vector& v, const Matrix& m, const Tolerance& tol = {});

bool in_image(const Vector& v, const Matrix& m, const Tolerance& tol = {});

/// Full row rank of the depth-`order` Hankel matrix of u.
bool is_persistently_exciting(const VectorSeq& u, Index order, const Tolerance& tol = {});

/// Throws NonFiniteError if any entry is NaN or Inf.
void require_finite(const Eigen::Ref<const Matrix>& m, const char* what);

}  // namespace oed
