// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; the dispatcher in kernels.cpp only routes here after a
// cpuid check, so nothing in this file may be called on older CPUs.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "metricgd/kernels.hpp"

namespace metricgd::kern::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i),
                               _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                               _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i),
                               _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* a, std::size_t rows, std::size_t cols,
          const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) y[i] = dot(a + i * cols, x, cols);
}

void ger_upper(double* a, std::size_t dim, const double* u, const double* v,
               double alpha) {
    for (std::size_t i = 0; i < dim; ++i) {
        const double ui = alpha * u[i];
        if (ui == 0.0) continue;
        double* row = a + i * dim;
        const __m256d uv = _mm256_set1_pd(ui);
        std::size_t j = i;
        for (; j + 4 <= dim; j += 4) {
            __m256d rv = _mm256_loadu_pd(row + j);
            rv = _mm256_fmadd_pd(uv, _mm256_loadu_pd(v + j), rv);
            _mm256_storeu_pd(row + j, rv);
        }
        for (; j < dim; ++j) row[j] += ui * v[j];
    }
}

} // namespace metricgd::kern::avx2

#endif // x86-64
