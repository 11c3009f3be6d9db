#include "metricgd/stepper.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "metricgd/rng.hpp"

namespace metricgd {

std::string policy_description(const StepPolicy& policy) {
    char buf[128];
    if (const auto* tr = std::get_if<TrustRegion>(&policy)) {
        std::snprintf(buf, sizeof buf, "trust_region(epsilon=%g)", tr->epsilon);
    } else if (const auto* fr = std::get_if<FixedRate>(&policy)) {
        std::snprintf(buf, sizeof buf, "fixed_rate(alpha=%g)", fr->alpha);
    } else {
        const auto& ls = std::get<LineSearch>(policy);
        std::snprintf(buf, sizeof buf,
                      "line_search(alpha0=%g,shrink=%g,c=%g,max=%d)",
                      ls.alpha0, ls.shrink, ls.armijo_c, ls.max_backtracks);
    }
    return buf;
}

StepResult solve_step(const Vec& g, const DampedMetric& metric,
                      const StepPolicy& policy, const LossProbe& probe) {
    const std::size_t d = metric.effective.dim();
    if (g.size() != d)
        throw DimensionMismatch("solve_step: gradient length != metric dim");
    if (std::holds_alternative<LineSearch>(policy) && !probe)
        throw Error("solve_step: line search needs a loss probe");

    StepResult r;
    r.metric_kind = metric.kind;
    r.lambda_used = metric.lambda;
    r.gradient_norm = norm(g);

    const double zero_tol = 1e-14 * std::sqrt(static_cast<double>(d));
    if (r.gradient_norm <= zero_tol) {
        r.dtheta.assign(d, 0.0);
        r.direction.assign(d, 0.0);
        r.status = StepStatus::zero_gradient;
        return r;
    }

    const SpdFactor factor = cholesky_spd(metric.effective);
    Vec p = spd_solve(factor, g);
    const double q = dot(g, p); // g^T M^{-1} g
    if (!(q > 0.0))
        throw NotPositiveDefinite(
            "solve_step: metric not positive along the gradient", -1);
    r.direction.resize(d);
    for (std::size_t i = 0; i < d; ++i) r.direction[i] = -p[i];

    if (const auto* tr = std::get_if<TrustRegion>(&policy)) {
        r.alpha = tr->epsilon / std::sqrt(q);
    } else if (const auto* fr = std::get_if<FixedRate>(&policy)) {
        r.alpha = fr->alpha;
    } else {
        const auto& ls = std::get<LineSearch>(policy);
        const double l0 = probe(Vec(d, 0.0));
        const double slope = -q; // g^T direction
        double alpha = ls.alpha0;
        bool accepted = false;
        Vec trial(d);
        for (int k = 0; k < ls.max_backtracks; ++k) {
            for (std::size_t i = 0; i < d; ++i)
                trial[i] = alpha * r.direction[i];
            if (probe(trial) <= l0 + ls.armijo_c * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= ls.shrink;
        }
        if (!accepted) {
            r.alpha = 0.0;
            r.dtheta.assign(d, 0.0);
            r.status = StepStatus::line_search_failed;
            return r;
        }
        r.alpha = alpha;
    }

    r.dtheta.resize(d);
    for (std::size_t i = 0; i < d; ++i) r.dtheta[i] = r.alpha * r.direction[i];
    r.constraint_value = quadratic_form(metric.effective, r.dtheta);
    return r;
}

Trace run_descent(const Model& model, const std::vector<Sample>& dataset,
                  const DescentConfig& cfg) {
    if (cfg.iterations < 1) throw Error("run_descent: iterations must be >= 1");
    if (cfg.batch_size < 1) throw Error("run_descent: batch_size must be >= 1");
    if (dataset.size() < cfg.batch_size)
        throw Error("run_descent: dataset smaller than one batch");
    if (cfg.lambda && *cfg.lambda < 0.0)
        throw Error("run_descent: lambda must be >= 0");

    Rng rng(cfg.seed);
    Vec theta = cfg.theta0 ? *cfg.theta0 : model.initial_params(rng);
    if (theta.size() != model.param_dim())
        throw DimensionMismatch("run_descent: theta0 length != param dim");

    Trace trace;
    trace.model_id = model.id();
    trace.kind = cfg.kind;
    trace.policy = policy_description(cfg.policy);
    trace.seed = cfg.seed;
    trace.lambda = cfg.lambda;
    trace.rows.reserve(static_cast<std::size_t>(cfg.iterations));

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t pos = dataset.size(); // force a shuffle on first use

    Batch batch;
    batch.reserve(cfg.batch_size);

    using clock = std::chrono::steady_clock;
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const auto t0 = clock::now();

        if (pos + cfg.batch_size > dataset.size()) {
            rng.shuffle(order); // new epoch; partial tail is dropped
            pos = 0;
        }
        batch.clear();
        for (std::size_t i = 0; i < cfg.batch_size; ++i)
            batch.push_back(dataset[order[pos + i]]);
        pos += cfg.batch_size;

        const double loss = batch_loss(model, theta, batch);
        const Vec g = batch_gradient(model, theta, batch);

        const DampedMetric assembled =
            build_metric(cfg.kind, model, batch, theta, 0.0);
        const double floor = default_damping(assembled.base);
        const double lambda0 = cfg.lambda.value_or(floor);
        const double ladder_base = lambda0 > 0.0 ? lambda0 : floor;

        const LossProbe probe = [&](const Vec& dtheta) {
            Vec t = theta;
            axpy(1.0, dtheta, t);
            return batch_loss(model, t, batch);
        };

        StepResult step;
        bool solved = false;
        for (int attempt = 0; attempt <= 6 && !solved; ++attempt) {
            const double lam =
                attempt == 0 ? lambda0
                             : ladder_base * std::pow(10.0, attempt);
            try {
                step = solve_step(g, assembled.redamped(lam), cfg.policy,
                                  probe);
                solved = true;
            } catch (const NotPositiveDefinite&) {
                if (attempt == 6)
                    throw MetricFailure(
                        std::string("run_descent: ") + metric_name(cfg.kind) +
                        " metric stayed indefinite after damping escalation");
            }
        }

        axpy(1.0, step.dtheta, theta);

        const double wall_ms =
            std::chrono::duration<double, std::milli>(clock::now() - t0)
                .count();
        trace.rows.push_back({iter, loss, step.gradient_norm, step.alpha,
                              norm(step.dtheta), step.constraint_value,
                              step.lambda_used, wall_ms});
    }
    trace.final_theta = std::move(theta);
    return trace;
}

std::pair<double, double> predicted_vs_actual_decrease(const Model& model,
                                                       const Vec& theta,
                                                       const Batch& batch,
                                                       const StepResult& step) {
    const Vec g = batch_gradient(model, theta, batch);
    const double predicted = dot(g, step.dtheta);
    Vec moved = theta;
    axpy(1.0, step.dtheta, moved);
    const double actual =
        batch_loss(model, moved, batch) - batch_loss(model, theta, batch);
    return {predicted, actual};
}

} // namespace metricgd
