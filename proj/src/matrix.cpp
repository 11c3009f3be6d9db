#include "metricgd/matrix.hpp"

#include <cmath>
#include <utility>

namespace metricgd {

double norm(const Vec& v) { return std::sqrt(squared_norm(v)); }

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec Matrix::apply(const Vec& x) const {
    if (x.size() != cols_)
        throw DimensionMismatch("Matrix::apply: size mismatch");
    Vec y(rows_, 0.0);
    kern::gemv(a_.data(), rows_, cols_, x.data(), y.data());
    return y;
}

Vec Matrix::apply_transposed(const Vec& x) const {
    if (x.size() != rows_)
        throw DimensionMismatch("Matrix::apply_transposed: size mismatch");
    Vec y(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        kern::axpy(x[i], row(i), y.data(), cols_);
    return y;
}

Matrix Matrix::matmul(const Matrix& b) const {
    if (cols_ != b.rows())
        throw DimensionMismatch("Matrix::matmul: inner dims differ");
    Matrix c(rows_, b.cols());
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* arow = row(i);
        for (std::size_t k = 0; k < cols_; ++k)
            kern::axpy(arow[k], b.row(k), c.row(i), b.cols());
    }
    return c;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

SymMatrix SymMatrix::identity(std::size_t n) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.a_[i * n + i] = 1.0;
    return m;
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
    SymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.a_[i * d.size() + i] = d[i];
    return m;
}

SymMatrix SymMatrix::from_upper(std::size_t dim, std::vector<double> buf) {
    if (buf.size() != dim * dim)
        throw DimensionMismatch("SymMatrix::from_upper: bad buffer size");
    SymMatrix m(dim);
    m.a_ = std::move(buf);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j)
            m.a_[j * dim + i] = m.a_[i * dim + j];
    for (double x : m.a_)
        if (!std::isfinite(x))
            throw NonFiniteEvaluation("SymMatrix::from_upper: non-finite entry");
    return m;
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
    if (m.rows() != m.cols())
        throw DimensionMismatch("SymMatrix::symmetrized: matrix not square");
    const std::size_t n = m.rows();
    std::vector<double> buf(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            buf[i * n + j] = 0.5 * (m(i, j) + m(j, i));
    return from_upper(n, std::move(buf));
}

Vec SymMatrix::apply(const Vec& x) const {
    if (x.size() != dim_)
        throw DimensionMismatch("SymMatrix::apply: size mismatch");
    Vec y(dim_, 0.0);
    kern::gemv(a_.data(), dim_, dim_, x.data(), y.data());
    return y;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += a_[i * dim_ + i];
    return t;
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
}

SymMatrix SymMatrix::damped(double lambda) const {
    SymMatrix m = *this;
    for (std::size_t i = 0; i < dim_; ++i) m.a_[i * dim_ + i] += lambda;
    return m;
}

} // namespace metricgd
