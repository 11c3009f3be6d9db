#pragma once

#include <cstddef>

// Dense inner-loop kernels used by the linear algebra and metric assembly
// layers. Every kernel has a scalar reference implementation and, on x86-64,
// an AVX2+FMA variant selected at runtime. The two are equivalence-tested;
// results may differ by rounding (FMA, vector summation order) but the
// selected backend is fixed per process, so runs stay deterministic.

namespace metricgd::kern {

enum class Backend { scalar, avx2 };

/// Backend currently used by the dispatched entry points.
Backend active_backend();

/// Select a backend explicitly. Throws metricgd::Error if this CPU cannot
/// run it. The environment variable METRICGD_KERNELS=scalar|avx2 overrides
/// the default choice at startup.
void set_backend(Backend b);

bool backend_supported(Backend b);
const char* backend_name(Backend b);

// --- dispatched entry points -------------------------------------------

/// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

/// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// y = A * x for row-major A (rows x cols). y must not alias A or x.
void gemv(const double* a, std::size_t rows, std::size_t cols,
          const double* x, double* y);

/// Upper-triangular rank-1 accumulate: a[i*dim+j] += alpha*u[i]*v[j] for
/// j >= i. Symmetric assemblies fill the upper triangle with this and
/// mirror once at the end.
void ger_upper(double* a, std::size_t dim, const double* u, const double* v,
               double alpha);

// --- reference implementations (always available, used by tests) --------

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols,
          const double* x, double* y);
void ger_upper(double* a, std::size_t dim, const double* u, const double* v,
               double alpha);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* a, std::size_t rows, std::size_t cols,
          const double* x, double* y);
void ger_upper(double* a, std::size_t dim, const double* u, const double* v,
               double alpha);
} // namespace avx2
#endif

} // namespace metricgd::kern
