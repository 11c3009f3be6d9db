#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "metricgd/datasets.hpp"
#include "metricgd/stepper.hpp"

namespace metricgd {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// One experiment: a model, a dataset spec, a subset of the six methods, a
/// step policy and shared run parameters. Serializes losslessly to/from the
/// JSON config format (see configs/ for committed examples).
struct ExperimentConfig {
    std::string model_id = "mlp_gaussian";
    std::size_t width = 16; // hidden width (0 = affine logits for softmax)
    double beta = 1.0;      // Gaussian head scale

    DatasetSpec dataset;

    std::vector<MetricKind> methods; // empty = all six
    StepPolicy policy = TrustRegion{0.1};
    std::optional<double> lambda; // nullopt = scale-aware auto damping
    int iterations = 100;
    std::size_t batch_size = 32;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
};

nlohmann::json dataset_spec_to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

/// FNV-1a over the canonical JSON dump; recorded in the manifest so trace
/// files can be matched back to the exact configuration.
std::string config_hash_hex(const ExperimentConfig& cfg);

struct MethodOutcome {
    MetricKind kind = MetricKind::Identity;
    bool ok = false;
    std::string error;      // set when !ok
    double final_loss = 0.0; // full-dataset loss at the final parameters
    std::string trace_file;
    double wall_ms = 0.0;
};

struct ExperimentResult {
    std::vector<MethodOutcome> outcomes;
    std::string out_dir;
    std::string manifest_file;

    bool all_failed() const;
};

/// Run every configured method, one trace CSV per method plus a JSON
/// manifest in out_dir. Sub-seeds are derived by hashing (seed, method
/// name), so adding a method never perturbs the streams of the others.
/// A MetricFailure in one method is recorded in its outcome; the remaining
/// methods still run.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Trace CSV schema (fixed):
///   iter,loss,grad_norm,alpha,step_norm,constraint,lambda_used,wall_ms
/// LF line endings, %.17g numbers. All columns except wall_ms are
/// reproduced byte-for-byte by reruns with the same seed.
void write_trace_csv(const Trace& trace, const std::string& path);
std::vector<TraceRow> read_trace_csv(const std::string& path);

/// Text summary of one or more trace files, sorted by final loss:
/// per method the final loss, iterations until the loss first dropped to
/// the threshold (default: 1.05 x best loss seen across the traces),
/// mean alpha and mean damping.
std::string compare_traces(const std::vector<std::string>& paths,
                           std::optional<double> threshold = {});

/// The step a metric produces vs the vanilla step at equal epsilon; shows
/// how the metric reshapes both length and direction.
struct StepGeometry {
    Vec vanilla_step;
    Vec metric_step;
    double angle_deg = 0.0;
};

StepGeometry demo_step_geometry(const Vec& g, const SymMatrix& m, double eps);
std::string format_step_geometry(const StepGeometry& geo, bool as_csv);

/// Samples as CSV (x0..,y0..) with a JSON metadata sidecar; the metadata
/// alone regenerates the dataset bit-identically.
void write_dataset_csv(const Dataset& ds, const std::string& path);

} // namespace metricgd
