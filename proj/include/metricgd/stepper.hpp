#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "metricgd/metrics.hpp"

namespace metricgd {

// How the scalar alpha in dtheta = -alpha M^{-1} g is chosen.

/// Closed-form alpha = eps / sqrt(g^T M^{-1} g): the largest step whose
/// metric norm stays on the constraint boundary dtheta^T M dtheta = eps^2.
struct TrustRegion {
    double epsilon;
};

/// Fixed learning rate.
struct FixedRate {
    double alpha;
};

/// Backtracking line search from alpha0 with the Armijo condition
/// L(theta + alpha p) <= L(theta) + c alpha g^T p.
struct LineSearch {
    double alpha0 = 1.0;
    double shrink = 0.5;
    double armijo_c = 1e-4;
    int max_backtracks = 40;
};

using StepPolicy = std::variant<TrustRegion, FixedRate, LineSearch>;

std::string policy_description(const StepPolicy& policy);

enum class StepStatus {
    ok,
    zero_gradient,      // ||g|| below threshold; null step taken
    line_search_failed, // Armijo never held; null step recorded
};

struct StepResult {
    Vec dtheta;              // alpha * direction, exactly
    double alpha = 0.0;
    double constraint_value = 0.0; // dtheta^T M_eff dtheta
    double gradient_norm = 0.0;
    Vec direction;           // -M_eff^{-1} g
    MetricKind metric_kind = MetricKind::Identity;
    double lambda_used = 0.0;
    StepStatus status = StepStatus::ok;
};

/// Loss at theta + dtheta, used by the line search.
using LossProbe = std::function<double(const Vec& dtheta)>;

/// Solve one constrained step: direction = -M_eff^{-1} g, alpha per policy.
/// A gradient with ||g|| <= 1e-14 sqrt(d) yields a null step with alpha = 0
/// (the closed-form alpha is undefined at g = 0, so the degenerate case is
/// resolved as "stay put" rather than an error).
/// Throws NotPositiveDefinite if the effective metric cannot be factorized.
StepResult solve_step(const Vec& g, const DampedMetric& metric,
                      const StepPolicy& policy, const LossProbe& probe = {});

struct TraceRow {
    int iter = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double alpha = 0.0;
    double step_norm = 0.0;
    double constraint = 0.0;
    double lambda_used = 0.0;
    double wall_ms = 0.0;
};

struct Trace {
    std::string model_id;
    MetricKind kind = MetricKind::Identity;
    std::string policy;
    std::uint64_t seed = 0;
    std::optional<double> lambda; // configured; per-iteration value in rows
    std::vector<TraceRow> rows;
    Vec final_theta;
};

struct DescentConfig {
    MetricKind kind = MetricKind::Identity;
    StepPolicy policy = TrustRegion{0.1};
    /// Damping; nullopt selects the scale-aware floor per iteration.
    std::optional<double> lambda;
    int iterations = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    /// Warm start; nullopt draws from the model's seeded initializer.
    std::optional<Vec> theta0;
};

/// Full descent loop: per iteration draw a batch (shuffled without
/// replacement, reshuffled every epoch), build the metric, solve the step,
/// update theta, and record one trace row. On NotPositiveDefinite the
/// damping is escalated by factors of 10 (at most 6 retries) within the
/// iteration; the lambda actually used lands in the trace. Runs with equal
/// seeds produce identical traces (wall_ms aside).
/// Throws MetricFailure when escalation runs out of retries.
Trace run_descent(const Model& model, const std::vector<Sample>& dataset,
                  const DescentConfig& cfg);

/// First-order predicted loss change g^T dtheta vs the realized change
/// L(theta + dtheta) - L(theta) on the same batch.
std::pair<double, double> predicted_vs_actual_decrease(const Model& model,
                                                       const Vec& theta,
                                                       const Batch& batch,
                                                       const StepResult& step);

} // namespace metricgd
