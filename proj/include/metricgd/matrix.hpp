#pragma once

#include <cstddef>
#include <vector>

#include "metricgd/errors.hpp"
#include "metricgd/kernels.hpp"

namespace metricgd {

/// Flat real vector; parameter vectors, gradients and right-hand sides.
using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("dot: vector lengths differ");
    return kern::dot(a.data(), b.data(), a.size());
}

inline double squared_norm(const Vec& v) {
    return kern::dot(v.data(), v.data(), v.size());
}

double norm(const Vec& v);

/// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
    if (x.size() != y.size())
        throw DimensionMismatch("axpy: vector lengths differ");
    kern::axpy(alpha, x.data(), y.data(), x.size());
}

bool all_finite(const Vec& v);

/// Dense row-major matrix (not necessarily square or symmetric).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }
    double* row(std::size_t i) { return a_.data() + i * cols_; }
    const double* row(std::size_t i) const { return a_.data() + i * cols_; }

    double& operator()(std::size_t i, std::size_t j) {
        return a_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        return a_[i * cols_ + j];
    }

    /// A * x
    Vec apply(const Vec& x) const;
    /// A^T * x
    Vec apply_transposed(const Vec& x) const;
    /// A * B
    Matrix matmul(const Matrix& b) const;
    Matrix transposed() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

/// Dense symmetric matrix. Exact symmetry (entries[i][j] == entries[j][i]
/// bitwise) is an invariant: instances can only be built through the
/// factories below, all of which fill one triangle and mirror it.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {}

    static SymMatrix identity(std::size_t n);
    static SymMatrix diagonal(const Vec& d);
    /// Takes a dim x dim buffer whose upper triangle (j >= i) is filled,
    /// mirrors it into the lower triangle, and validates finiteness.
    static SymMatrix from_upper(std::size_t dim, std::vector<double> buf);
    /// (M + M^T) / 2 of a square matrix; for symmetrizing at assembly
    /// boundaries (e.g. finite-difference Hessians).
    static SymMatrix symmetrized(const Matrix& m);

    std::size_t dim() const { return dim_; }
    const double* data() const { return a_.data(); }
    const double* row(std::size_t i) const { return a_.data() + i * dim_; }

    double operator()(std::size_t i, std::size_t j) const {
        return a_[i * dim_ + j];
    }

    /// M * x
    Vec apply(const Vec& x) const;

    double trace() const;
    double max_abs() const;

    /// M + lambda * I; symmetry is preserved exactly.
    SymMatrix damped(double lambda) const;

private:
    std::size_t dim_ = 0;
    std::vector<double> a_;
};

} // namespace metricgd
