#include "metricgd/linalg.hpp"

#include <cmath>
#include <string>

namespace metricgd {

SpdFactor cholesky_spd(const SymMatrix& m) {
    const std::size_t n = m.dim();
    SpdFactor f;
    f.dim = n;
    f.lower.assign(n * n, 0.0);
    double* l = f.lower.data();

    for (std::size_t j = 0; j < n; ++j) {
        double* lrow_j = l + j * n;
        const double d = m(j, j) - kern::dot(lrow_j, lrow_j, j);
        if (!(d > 0.0)) // catches d <= 0 and NaN
            throw NotPositiveDefinite(
                "cholesky_spd: pivot " + std::to_string(j) + " is " +
                    std::to_string(d),
                static_cast<int>(j));
        lrow_j[j] = std::sqrt(d);
        const double inv = 1.0 / lrow_j[j];
        for (std::size_t i = j + 1; i < n; ++i) {
            double* lrow_i = l + i * n;
            lrow_i[j] = (m(i, j) - kern::dot(lrow_i, lrow_j, j)) * inv;
        }
    }
    return f;
}

Vec spd_solve(const SpdFactor& f, const Vec& b) {
    const std::size_t n = f.dim;
    if (b.size() != n)
        throw DimensionMismatch("spd_solve: rhs length != factor dim");
    const double* l = f.lower.data();

    // forward: L y = b
    Vec y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* lrow = l + i * n;
        y[i] = (b[i] - kern::dot(lrow, y.data(), i)) / lrow[i];
    }
    // backward: L^T x = y (column access, scalar loop)
    Vec x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * x[k];
        x[ii] = s / l[ii * n + ii];
    }
    return x;
}

double quadratic_form(const SymMatrix& m, const Vec& v) {
    if (v.size() != m.dim())
        throw DimensionMismatch("quadratic_form: size mismatch");
    return dot(v, m.apply(v));
}

SymMatrix add_damping(const SymMatrix& m, double lambda) {
    return m.damped(lambda);
}

QuadMin min_quadratic(double c, const Vec& g, const SymMatrix& m) {
    const SpdFactor f = cholesky_spd(m);
    Vec s = spd_solve(f, g);
    for (double& x : s) x = -x;
    const double value = c + dot(g, s) + 0.5 * quadratic_form(m, s);
    return {std::move(s), value};
}

} // namespace metricgd
