#include "oed/matlin.hpp"

#include <algorithm>
#include <string>

#include "oed/errors.hpp"

namespace oed {

VectorSeq::VectorSeq(Index dim, long start_index) : dim_(dim), start_(start_index) {
    if (dim < 0) throw DimensionError("VectorSeq: negative dimension");
}

VectorSeq::VectorSeq(Index dim, std::vector<Vector> samples, long start_index)
    : VectorSeq(dim, start_index) {
    samples_.reserve(samples.size());
    for (auto& s : samples) push_back(s);
}

VectorSeq VectorSeq::scalar(const std::vector<double>& values, long start_index) {
    VectorSeq f(1, start_index);
    for (double v : values) f.push_back(Vector::Constant(1, v));
    return f;
}

VectorSeq VectorSeq::from_columns(const Matrix& columns, long start_index) {
    VectorSeq f(columns.rows(), start_index);
    for (Index j = 0; j < columns.cols(); ++j) f.push_back(columns.col(j));
    return f;
}

const Vector& VectorSeq::at(long t) const {
    if (t < start_ || t > end_index()) {
        throw DimensionError("VectorSeq: time " + std::to_string(t) + " outside [" +
                             std::to_string(start_) + ", " + std::to_string(end_index()) + "]");
    }
    return samples_[static_cast<std::size_t>(t - start_)];
}

void VectorSeq::push_back(const Vector& v) {
    if (v.size() != dim_) {
        throw DimensionError("VectorSeq: sample of length " + std::to_string(v.size()) +
                             ", expected " + std::to_string(dim_));
    }
    require_finite(v, "VectorSeq sample");
    samples_.push_back(v);
}

VectorSeq VectorSeq::window(long first, long last) const {
    VectorSeq w(dim_, first);
    for (long t = first; t <= last; ++t) w.samples_.push_back(at(t));
    return w;
}

Vector VectorSeq::stacked(long first, long last) const {
    const long count = std::max(0L, last - first + 1);
    Vector out(count * dim_);
    for (long k = 0; k < count; ++k) out.segment(k * dim_, dim_) = at(first + k);
    return out;
}

Matrix VectorSeq::as_columns() const {
    Matrix out(dim_, size());
    for (Index j = 0; j < size(); ++j) out.col(j) = (*this)[j];
    return out;
}

bool operator==(const VectorSeq& a, const VectorSeq& b) {
    if (a.dim_ != b.dim_ || a.start_ != b.start_ || a.samples_.size() != b.samples_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.samples_.size(); ++i) {
        if (a.samples_[i] != b.samples_[i]) return false;
    }
    return true;
}

Matrix hankel(const VectorSeq& f, Index depth) {
    if (depth < 1 || depth > f.size()) {
        throw DimensionError("hankel: depth " + std::to_string(depth) + " outside [1, " +
                             std::to_string(f.size()) + "]");
    }
    return hankel(f, depth, f.start_index(), f.end_index());
}

Matrix hankel(const VectorSeq& f, Index depth, long first, long last) {
    if (depth < 0) throw DimensionError("hankel: negative depth");
    const Index cols = std::max<Index>(0, last - first + 2 - depth);
    const Index d = f.dim();
    Matrix h(depth * d, cols);
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < depth; ++r) h.block(r * d, c, d, 1) = f.at(first + r + c);
    }
    return h;
}

Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
    if (top.cols() != bottom.cols()) {
        throw DimensionError("stack_rows: column counts " + std::to_string(top.cols()) + " and " +
                             std::to_string(bottom.cols()) + " differ");
    }
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
    if (!m.allFinite()) throw NonFiniteError(std::string(what) + ": non-finite entry");
}

Vector singular_values(const Matrix& m) {
    require_finite(m, "singular_values");
    if (m.size() == 0) return Vector(0);
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

double rank_threshold(const Matrix& m, const Vector& sigma, const Tolerance& tol) {
    const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
    return tol.rel * smax * static_cast<double>(std::max(m.rows(), m.cols())) + tol.abs;
}

namespace {

Index count_above(const Vector& sigma, double threshold) {
    Index r = 0;
    while (r < sigma.size() && sigma(r) > threshold) ++r;
    return r;
}

}  // namespace

Index numerical_rank(const Matrix& m, const Tolerance& tol) {
    const Vector sigma = singular_values(m);
    return count_above(sigma, rank_threshold(m, sigma, tol));
}

Matrix left_kernel_basis(const Matrix& m, const Tolerance& tol) {
    require_finite(m, "left_kernel_basis");
    const Index rows = m.rows();
    if (m.cols() == 0 || rows == 0) return Matrix::Identity(rows, rows);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    const Vector& sigma = svd.singularValues();
    const Index rank = count_above(sigma, rank_threshold(m, sigma, tol));
    return svd.matrixU().rightCols(rows - rank).transpose();
}

double image_residual(const Vector& v, const Matrix& m, const Tolerance& tol) {
    if (v.size() != m.rows()) {
        throw DimensionError("in_image: vector length " + std::to_string(v.size()) +
                             " but matrix has " + std::to_string(m.rows()) + " rows");
    }
    require_finite(v, "in_image vector");
    require_finite(m, "in_image matrix");
    if (m.cols() == 0 || m.rows() == 0) return v.norm();
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const Vector& sigma = svd.singularValues();
    const Index rank = count_above(sigma, rank_threshold(m, sigma, tol));
    const auto basis = svd.matrixU().leftCols(rank);
    return (v - basis * (basis.transpose() * v)).norm();
}

bool in_image(const Vector& v, const Matrix& m, const Tolerance& tol) {
    return image_residual(v, m, tol) <= tol.abs + tol.rel * v.norm();
}

bool is_persistently_exciting(const VectorSeq& u, Index order, const Tolerance& tol) {
    const Matrix h = hankel(u, order);
    return numerical_rank(h, tol) == h.rows();
}

}  // namespace oed
