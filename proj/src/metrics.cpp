#include "metricgd/metrics.hpp"

#include <cmath>

namespace metricgd {

const char* metric_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::Identity: return "vanilla";
        case MetricKind::ClassicalGaussNewton: return "cgn";
        case MetricKind::EmpiricalFisher: return "fisher";
        case MetricKind::GradientCovariance: return "gradcov";
        case MetricKind::Hessian: return "newton";
        case MetricKind::GeneralizedGaussNewton: return "ggn";
    }
    return "?";
}

MetricKind metric_from_name(const std::string& name) {
    for (MetricKind k : all_metric_kinds())
        if (name == metric_name(k)) return k;
    throw ConfigError("unknown method name: " + name);
}

const std::vector<MetricKind>& all_metric_kinds() {
    static const std::vector<MetricKind> kinds = {
        MetricKind::Identity,          MetricKind::ClassicalGaussNewton,
        MetricKind::EmpiricalFisher,   MetricKind::GradientCovariance,
        MetricKind::Hessian,           MetricKind::GeneralizedGaussNewton,
    };
    return kinds;
}

namespace {

void scale_buf(std::vector<double>& buf, double s) {
    for (double& v : buf) v *= s;
}

SymMatrix assemble_cgn(const Model& model, const Batch& batch,
                       const Vec& theta, double extra_scale) {
    const std::size_t d = model.param_dim();
    std::vector<double> buf(d * d, 0.0);
    for (const Sample& s : batch) {
        const Matrix j = model.rep_jacobian(theta, s.x);
        for (std::size_t k = 0; k < j.rows(); ++k)
            kern::ger_upper(buf.data(), d, j.row(k), j.row(k), 1.0);
    }
    scale_buf(buf, extra_scale / static_cast<double>(batch.size()));
    return SymMatrix::from_upper(d, std::move(buf));
}

SymMatrix assemble_outer(const Model& model, const Batch& batch,
                         const Vec& theta, bool log_density) {
    const std::size_t d = model.param_dim();
    std::vector<double> buf(d * d, 0.0);
    for (const Sample& s : batch) {
        const Vec g = log_density ? model.log_density_grad(theta, s)
                                  : model.loss_grad_theta(theta, s);
        kern::ger_upper(buf.data(), d, g.data(), g.data(), 1.0);
    }
    scale_buf(buf, 1.0 / static_cast<double>(batch.size()));
    return SymMatrix::from_upper(d, std::move(buf));
}

SymMatrix assemble_hessian(const Model& model, const Batch& batch,
                           const Vec& theta) {
    if (!model.has_loss_hessian_theta())
        throw CapabilityMissing(model.id() +
                                ": Hessian metric needs an analytic loss "
                                "Hessian");
    const std::size_t d = model.param_dim();
    std::vector<double> buf(d * d, 0.0);
    for (const Sample& s : batch) {
        const SymMatrix hs = model.loss_hessian_theta(theta, s);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) buf[i * d + j] += hs(i, j);
    }
    scale_buf(buf, 1.0 / static_cast<double>(batch.size()));
    return SymMatrix::from_upper(d, std::move(buf));
}

SymMatrix assemble_ggn(const Model& model, const Batch& batch,
                       const Vec& theta) {
    const std::size_t d = model.param_dim();
    const std::size_t m = model.rep_dim();
    std::vector<double> buf(d * d, 0.0);
    Matrix w(m, d);
    for (const Sample& s : batch) {
        const Matrix j = model.rep_jacobian(theta, s.x);
        const SymMatrix hy = model.loss_hess_h(s.y, model.representation(theta, s.x));
        std::fill(w.data(), w.data() + m * d, 0.0);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = 0; l < m; ++l)
                if (hy(k, l) != 0.0)
                    kern::axpy(hy(k, l), j.row(l), w.row(k), d);
        for (std::size_t k = 0; k < m; ++k)
            kern::ger_upper(buf.data(), d, j.row(k), w.row(k), 1.0);
    }
    scale_buf(buf, 1.0 / static_cast<double>(batch.size()));
    return SymMatrix::from_upper(d, std::move(buf));
}

} // namespace

DampedMetric build_metric(MetricKind kind, const Model& model,
                          const Batch& batch, const Vec& theta,
                          double lambda) {
    if (batch.empty()) throw EmptyBatch("build_metric: empty batch");
    if (lambda < 0.0) throw Error("build_metric: lambda must be >= 0");
    if (theta.size() != model.param_dim())
        throw DimensionMismatch("build_metric: theta length != param dim");

    SymMatrix base;
    switch (kind) {
        case MetricKind::Identity:
            base = SymMatrix::identity(model.param_dim());
            break;
        case MetricKind::ClassicalGaussNewton:
            base = assemble_cgn(model, batch, theta, 1.0);
            break;
        case MetricKind::EmpiricalFisher:
            if (!model.has_density())
                throw CapabilityMissing(
                    model.id() + ": empirical Fisher needs a log-density");
            base = assemble_outer(model, batch, theta, true);
            break;
        case MetricKind::GradientCovariance:
            base = assemble_outer(model, batch, theta, false);
            break;
        case MetricKind::Hessian:
            base = assemble_hessian(model, batch, theta);
            break;
        case MetricKind::GeneralizedGaussNewton:
            base = assemble_ggn(model, batch, theta);
            break;
    }
    SymMatrix eff = base.damped(lambda);
    return {kind, std::move(base), lambda, std::move(eff)};
}

SymMatrix exact_fisher_gaussian(const Model& model, const Batch& batch,
                                const Vec& theta) {
    if (!model.has_gaussian_head())
        throw CapabilityMissing(model.id() +
                                ": exact Fisher needs a fixed-variance "
                                "Gaussian head");
    if (batch.empty()) throw EmptyBatch("exact_fisher_gaussian: empty batch");
    const double beta = model.gaussian_beta();
    return assemble_cgn(model, batch, theta, 1.0 / (beta * beta));
}

double kl_gaussian_fixed_var(const Vec& mu1, const Vec& mu2, double beta) {
    if (mu1.size() != mu2.size())
        throw DimensionMismatch("kl_gaussian_fixed_var: mean dims differ");
    if (!(beta > 0.0)) throw Error("kl_gaussian_fixed_var: beta must be > 0");
    Vec d(mu1.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = mu2[i] - mu1[i];
    return squared_norm(d) / (2.0 * beta * beta);
}

double default_damping(const SymMatrix& base) {
    return 1e-6 *
           (1.0 + std::abs(base.trace()) / static_cast<double>(base.dim()));
}

} // namespace metricgd
