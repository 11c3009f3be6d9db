#pragma once

#include <functional>
#include <string>

#include "metricgd/matrix.hpp"

// Central-difference oracles. These validate every analytic derivative in
// the library and must stay independent of the code paths they check: they
// only ever call the probed function.

namespace metricgd::numcheck {

struct FdConfig {
    /// Step for first derivatives (central differences, error O(h^2)).
    double step = 1e-5;
    /// Step for second differences; these divide by h^2, so the rounding
    /// floor forces a larger h than for gradients.
    double hessian_step = 1e-4;
    double rtol = 1e-5;
    double atol = 1e-8;
};

using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;

/// (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
Vec fd_gradient(const ScalarFn& f, const Vec& x, const FdConfig& cfg = {});

/// Column-wise central differences of a vector-valued function.
Matrix fd_jacobian(const VectorFn& f, const Vec& x, const FdConfig& cfg = {});

/// Second-order central stencil: four-point formula for off-diagonal
/// entries, (f(x+h e_i) - 2 f(x) + f(x-h e_i)) / h^2 on the diagonal.
/// Output is exactly symmetric.
SymMatrix fd_hessian(const ScalarFn& f, const Vec& x, const FdConfig& cfg = {});

/// Elementwise |a_i - b_i| <= atol + rtol * |b_i| with a report of the
/// worst offender.
struct CloseReport {
    bool ok = true;
    std::size_t worst_index = 0;
    double a_value = 0.0;
    double b_value = 0.0;
    double abs_diff = 0.0;
    double bound = 0.0;

    std::string describe() const;
    explicit operator bool() const { return ok; }
};

CloseReport check_close(const double* a, const double* b, std::size_t n,
                        double rtol, double atol);
CloseReport check_close(const Vec& a, const Vec& b, double rtol,
                        double atol = 0.0);
CloseReport check_close(const Matrix& a, const Matrix& b, double rtol,
                        double atol = 0.0);
CloseReport check_close(const SymMatrix& a, const SymMatrix& b, double rtol,
                        double atol = 0.0);
CloseReport check_close(double a, double b, double rtol, double atol = 0.0);

} // namespace metricgd::numcheck
