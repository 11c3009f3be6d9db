#include "metricgd/numcheck.hpp"

#include <cmath>
#include <cstdio>

namespace metricgd::numcheck {

namespace {

double probe(const ScalarFn& f, const Vec& x) {
    const double v = f(x);
    if (!std::isfinite(v))
        throw NonFiniteEvaluation("fd probe returned a non-finite value");
    return v;
}

Vec probe(const VectorFn& f, const Vec& x) {
    Vec v = f(x);
    if (!all_finite(v))
        throw NonFiniteEvaluation("fd probe returned a non-finite value");
    return v;
}

} // namespace

Vec fd_gradient(const ScalarFn& f, const Vec& x, const FdConfig& cfg) {
    const double h = cfg.step;
    Vec g(x.size(), 0.0);
    Vec p = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        p[i] = x[i] + h;
        const double fp = probe(f, p);
        p[i] = x[i] - h;
        const double fm = probe(f, p);
        p[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

Matrix fd_jacobian(const VectorFn& f, const Vec& x, const FdConfig& cfg) {
    const double h = cfg.step;
    Vec p = x;
    Matrix j;
    for (std::size_t c = 0; c < x.size(); ++c) {
        p[c] = x[c] + h;
        const Vec fp = probe(f, p);
        p[c] = x[c] - h;
        const Vec fm = probe(f, p);
        p[c] = x[c];
        if (j.rows() == 0) j = Matrix(fp.size(), x.size());
        for (std::size_t r = 0; r < fp.size(); ++r)
            j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
    }
    return j;
}

SymMatrix fd_hessian(const ScalarFn& f, const Vec& x, const FdConfig& cfg) {
    const double h = cfg.hessian_step;
    const std::size_t n = x.size();
    const double f0 = probe(f, x);
    Vec p = x;
    std::vector<double> buf(n * n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        p[i] = x[i] + h;
        const double fp = probe(f, p);
        p[i] = x[i] - h;
        const double fm = probe(f, p);
        p[i] = x[i];
        buf[i * n + i] = (fp - 2.0 * f0 + fm) / (h * h);

        for (std::size_t j = i + 1; j < n; ++j) {
            p[i] = x[i] + h;
            p[j] = x[j] + h;
            const double fpp = probe(f, p);
            p[j] = x[j] - h;
            const double fpm = probe(f, p);
            p[i] = x[i] - h;
            p[j] = x[j] + h;
            const double fmp = probe(f, p);
            p[j] = x[j] - h;
            const double fmm = probe(f, p);
            p[i] = x[i];
            p[j] = x[j];
            buf[i * n + j] = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    }
    return SymMatrix::from_upper(n, std::move(buf));
}

CloseReport check_close(const double* a, const double* b, std::size_t n,
                        double rtol, double atol) {
    CloseReport r;
    double worst_excess = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = std::abs(a[i] - b[i]);
        const double bound = atol + rtol * std::abs(b[i]);
        if (diff > bound) r.ok = false;
        const double excess = diff - bound;
        if (excess > worst_excess) {
            worst_excess = excess;
            r.worst_index = i;
            r.a_value = a[i];
            r.b_value = b[i];
            r.abs_diff = diff;
            r.bound = bound;
        }
    }
    return r;
}

CloseReport check_close(const Vec& a, const Vec& b, double rtol, double atol) {
    if (a.size() != b.size())
        throw DimensionMismatch("check_close: lengths differ");
    return check_close(a.data(), b.data(), a.size(), rtol, atol);
}

CloseReport check_close(const Matrix& a, const Matrix& b, double rtol,
                        double atol) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("check_close: matrix shapes differ");
    return check_close(a.data(), b.data(), a.rows() * a.cols(), rtol, atol);
}

CloseReport check_close(const SymMatrix& a, const SymMatrix& b, double rtol,
                        double atol) {
    if (a.dim() != b.dim())
        throw DimensionMismatch("check_close: matrix dims differ");
    return check_close(a.data(), b.data(), a.dim() * a.dim(), rtol, atol);
}

CloseReport check_close(double a, double b, double rtol, double atol) {
    return check_close(&a, &b, 1, rtol, atol);
}

std::string CloseReport::describe() const {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%s: worst at [%zu]: a=%.17g b=%.17g |diff|=%.3g bound=%.3g",
                  ok ? "close" : "NOT close", worst_index, a_value, b_value,
                  abs_diff, bound);
    return buf;
}

} // namespace metricgd::numcheck
