#pragma once

#include "metricgd/matrix.hpp"

namespace metricgd {

/// Lower-triangular Cholesky factor L with L * L^T reproducing the input.
struct SpdFactor {
    std::size_t dim = 0;
    std::vector<double> lower; // row-major, strictly the lower triangle + diag

    double operator()(std::size_t i, std::size_t j) const {
        return lower[i * dim + j];
    }
};

/// Cholesky factorization of a symmetric positive-definite matrix.
/// Throws NotPositiveDefinite (with the offending pivot index) when a pivot
/// is <= 0; callers treat that as "increase damping and retry". No jitter
/// is applied here, so the damping policy upstream stays the only authority
/// on lambda.
SpdFactor cholesky_spd(const SymMatrix& m);

/// Solve M x = b given the factor of M (forward + backward substitution).
Vec spd_solve(const SpdFactor& f, const Vec& b);

/// v^T M v
double quadratic_form(const SymMatrix& m, const Vec& v);

/// M + lambda * I
SymMatrix add_damping(const SymMatrix& m, double lambda);

struct QuadMin {
    Vec argmin;
    double value;
};

/// Global minimum of f(s) = c + g^T s + 1/2 s^T M s for positive-definite M:
/// the unique stationary point s* = -M^{-1} g and f(s*).
QuadMin min_quadratic(double c, const Vec& g, const SymMatrix& m);

} // namespace metricgd
