#include "metricgd/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "metricgd/errors.hpp"

namespace metricgd::kern {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
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
        for (std::size_t j = i; j < dim; ++j) row[j] += ui * v[j];
    }
}

} // namespace scalar

namespace {

struct Vtable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*gemv)(const double*, std::size_t, std::size_t, const double*,
                 double*);
    void (*ger_upper)(double*, std::size_t, const double*, const double*,
                      double);
};

constexpr Vtable kScalarVtable{scalar::dot, scalar::axpy, scalar::gemv,
                               scalar::ger_upper};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Vtable kAvx2Vtable{avx2::dot, avx2::axpy, avx2::gemv,
                             avx2::ger_upper};

bool cpu_has_avx2_fma() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#else
bool cpu_has_avx2_fma() { return false; }
#endif

struct State {
    Backend backend;
    const Vtable* vt;
};

State initial_state() {
    Backend b = cpu_has_avx2_fma() ? Backend::avx2 : Backend::scalar;
    if (const char* env = std::getenv("METRICGD_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) b = Backend::scalar;
        else if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2_fma())
            b = Backend::avx2;
    }
#if defined(__x86_64__) || defined(_M_X64)
    return {b, b == Backend::avx2 ? &kAvx2Vtable : &kScalarVtable};
#else
    return {b, &kScalarVtable};
#endif
}

State& state() {
    static State s = initial_state();
    return s;
}

} // namespace

Backend active_backend() { return state().backend; }

bool backend_supported(Backend b) {
    return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2_fma());
}

const char* backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

void set_backend(Backend b) {
    if (!backend_supported(b))
        throw Error(std::string("kernel backend not supported on this CPU: ") +
                    backend_name(b));
#if defined(__x86_64__) || defined(_M_X64)
    state() = {b, b == Backend::avx2 ? &kAvx2Vtable : &kScalarVtable};
#else
    state() = {b, &kScalarVtable};
#endif
}

double dot(const double* a, const double* b, std::size_t n) {
    return state().vt->dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    state().vt->axpy(alpha, x, y, n);
}

void gemv(const double* a, std::size_t rows, std::size_t cols,
          const double* x, double* y) {
    state().vt->gemv(a, rows, cols, x, y);
}

void ger_upper(double* a, std::size_t dim, const double* u, const double* v,
               double alpha) {
    state().vt->ger_upper(a, dim, u, v, alpha);
}

} // namespace metricgd::kern
