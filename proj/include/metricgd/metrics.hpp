#pragma once

#include "metricgd/linalg.hpp"
#include "metricgd/models.hpp"

namespace metricgd {

/// The six step metrics. Each kind names the matrix M that constrains the
/// update through dtheta^T M dtheta <= eps^2.
enum class MetricKind {
    Identity,
    ClassicalGaussNewton,
    EmpiricalFisher,
    GradientCovariance,
    Hessian,
    GeneralizedGaussNewton,
};

/// Short method name used in CLI flags, trace file names and seed
/// derivation: vanilla, cgn, fisher, gradcov, newton, ggn.
const char* metric_name(MetricKind kind);
MetricKind metric_from_name(const std::string& name);
const std::vector<MetricKind>& all_metric_kinds();

/// An assembled metric: the raw batch assembly plus Tikhonov damping.
/// effective == base + lambda I always holds.
struct DampedMetric {
    MetricKind kind = MetricKind::Identity;
    SymMatrix base;
    double lambda = 0.0;
    SymMatrix effective;

    /// Same base, different damping; used by the damping escalation loop.
    DampedMetric redamped(double new_lambda) const {
        return {kind, base, new_lambda, base.damped(new_lambda)};
    }
};

/// Assemble the metric of the given kind as an empirical mean over the
/// batch (in batch order), then damp it.
///
///   Identity               -> I
///   ClassicalGaussNewton   -> mean_s J^T J
///   EmpiricalFisher        -> mean_s (grad log p)(grad log p)^T
///   GradientCovariance     -> mean_s (grad l)(grad l)^T
///   Hessian                -> Hessian of the batch loss (analytic)
///   GeneralizedGaussNewton -> mean_s J^T H_y J
DampedMetric build_metric(MetricKind kind, const Model& model,
                          const Batch& batch, const Vec& theta, double lambda);

/// Averaged Fisher information matrix of the fixed-variance Gaussian head,
/// in closed form: mean_s J^T J / beta^2.
SymMatrix exact_fisher_gaussian(const Model& model, const Batch& batch,
                                const Vec& theta);

/// KL divergence between N(mu1, beta^2 I) and N(mu2, beta^2 I):
/// ||mu2 - mu1||^2 / (2 beta^2).
double kl_gaussian_fixed_var(const Vec& mu1, const Vec& mu2, double beta);

/// Scale-aware damping floor, 1e-6 * (1 + |trace| / dim). Used when no
/// lambda is configured; keeps rank-deficient assemblies factorizable.
double default_damping(const SymMatrix& base);

} // namespace metricgd
