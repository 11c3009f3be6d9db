#pragma once

#include <stdexcept>
#include <string>

namespace metricgd {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible (vector length, matrix dims, ...).
struct DimensionMismatch : Error {
    using Error::Error;
};

/// A Cholesky pivot was <= 0; the matrix is not positive-definite.
/// Callers are expected to increase damping and retry.
struct NotPositiveDefinite : Error {
    NotPositiveDefinite(std::string msg, int pivot_arg)
        : Error(std::move(msg)), pivot(pivot_arg) {}
    int pivot;
};

/// The model does not implement the requested optional capability
/// (log-density, residual form, analytic loss Hessian).
struct CapabilityMissing : Error {
    using Error::Error;
};

struct EmptyBatch : Error {
    using Error::Error;
};

/// Damping escalation ran out of retries while building a metric.
struct MetricFailure : Error {
    using Error::Error;
};

/// A probed function returned NaN or infinity.
struct NonFiniteEvaluation : Error {
    using Error::Error;
};

/// Unrecognized dataset spec name.
struct UnknownSpec : Error {
    using Error::Error;
};

/// A trace CSV does not follow the fixed schema.
struct MalformedTrace : Error {
    using Error::Error;
};

/// Experiment configuration is invalid or does not resolve.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace metricgd
