#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <utility>

#include "metricgd/models.hpp"
#include "metricgd/rng.hpp"

namespace testutil {

using namespace metricgd;

inline Vec random_vec(Rng& rng, std::size_t n, double lo = -1.0,
                      double hi = 1.0) {
    Vec v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline Vec random_theta(const Model& model, Rng& rng) {
    return random_vec(rng, model.param_dim());
}

inline Vec one_hot(std::size_t k, std::size_t classes) {
    Vec y(classes, 0.0);
    y[k] = 1.0;
    return y;
}

inline Sample random_sample(const Model& model, Rng& rng, bool onehot_y) {
    Sample s;
    s.x = random_vec(rng, model.input_dim());
    if (onehot_y)
        s.y = one_hot(rng.bounded(model.rep_dim()), model.rep_dim());
    else
        s.y = random_vec(rng, model.rep_dim());
    return s;
}

inline Batch random_batch(const Model& model, Rng& rng, std::size_t n,
                          bool onehot_y) {
    Batch b;
    b.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        b.push_back(random_sample(model, rng, onehot_y));
    return b;
}

/// Minimal model with none of the optional capabilities: scalar
/// h = theta[0] * x[0] under squared error. Exercises CapabilityMissing
/// paths that the shipped models never hit.
struct PlainModel final : Model {
    std::string id() const override { return "plain"; }
    std::size_t param_dim() const override { return 1; }
    std::size_t rep_dim() const override { return 1; }
    std::size_t input_dim() const override { return 1; }

    Vec representation(const Vec& theta, const Vec& x) const override {
        return {theta[0] * x[0]};
    }
    Matrix rep_jacobian(const Vec&, const Vec& x) const override {
        Matrix j(1, 1);
        j(0, 0) = x[0];
        return j;
    }
    double atomic_loss(const Vec& y, const Vec& h) const override {
        const double r = y[0] - h[0];
        return 0.5 * r * r;
    }
    Vec loss_grad_h(const Vec& y, const Vec& h) const override {
        return {h[0] - y[0]};
    }
    SymMatrix loss_hess_h(const Vec&, const Vec&) const override {
        return SymMatrix::identity(1);
    }
    Vec initial_params(Rng&) const override { return {0.0}; }
};

/// Random invertible map with condition number <= cond, as a Householder
/// reflection sandwich H1 D H2; the inverse H2 D^{-1} H1 comes for free.
inline std::pair<Matrix, Matrix> random_conditioned_map(std::size_t d,
                                                        double cond,
                                                        Rng& rng) {
    auto householder = [&](void) {
        Vec v = random_vec(rng, d, -1.0, 1.0);
        const double s = squared_norm(v);
        Matrix h = Matrix::identity(d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                h(i, j) -= 2.0 * v[i] * v[j] / s;
        return h;
    };
    const Matrix h1 = householder();
    const Matrix h2 = householder();

    Vec diag(d), inv_diag(d);
    for (std::size_t i = 0; i < d; ++i) {
        diag[i] = std::pow(cond, rng.uniform()); // in [1, cond]
        inv_diag[i] = 1.0 / diag[i];
    }
    auto scale_rows = [&](const Matrix& m, const Vec& s) {
        Matrix out = m;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) out(i, j) *= s[i];
        return out;
    };
    // reflections are symmetric involutions, so the inverse is H2 D^{-1} H1
    Matrix a = h1.matmul(scale_rows(h2, diag));
    Matrix a_inv = h2.matmul(scale_rows(h1, inv_diag));
    return {std::move(a), std::move(a_inv)};
}

} // namespace testutil
