#include "metricgd/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "metricgd/rng.hpp"

namespace metricgd {

using nlohmann::json;

// --- config serialization ---------------------------------------------------

json dataset_spec_to_json(const DatasetSpec& spec) {
    json j;
    j["spec"] = spec.name;
    j["n"] = spec.n;
    j["noise"] = spec.noise;
    j["input_dim"] = spec.input_dim;
    j["output_dim"] = spec.output_dim;
    j["seed"] = spec.seed;
    return j;
}

DatasetSpec dataset_spec_from_json(const json& j) {
    DatasetSpec spec;
    spec.name = j.at("spec").get<std::string>();
    spec.n = j.at("n").get<std::size_t>();
    spec.noise = j.value("noise", 0.0);
    spec.input_dim = j.value("input_dim", std::size_t{0});
    spec.output_dim = j.value("output_dim", std::size_t{0});
    spec.seed = j.value("seed", std::uint64_t{0});
    return spec;
}

namespace {

json policy_to_json(const StepPolicy& policy) {
    json j;
    if (const auto* tr = std::get_if<TrustRegion>(&policy)) {
        j["type"] = "trust_region";
        j["epsilon"] = tr->epsilon;
    } else if (const auto* fr = std::get_if<FixedRate>(&policy)) {
        j["type"] = "fixed_rate";
        j["alpha"] = fr->alpha;
    } else {
        const auto& ls = std::get<LineSearch>(policy);
        j["type"] = "line_search";
        j["alpha0"] = ls.alpha0;
        j["shrink"] = ls.shrink;
        j["armijo_c"] = ls.armijo_c;
        j["max_backtracks"] = ls.max_backtracks;
    }
    return j;
}

StepPolicy policy_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "trust_region") {
        const double eps = j.at("epsilon").get<double>();
        if (!(eps > 0.0)) throw ConfigError("policy: epsilon must be > 0");
        return TrustRegion{eps};
    }
    if (type == "fixed_rate") {
        const double alpha = j.at("alpha").get<double>();
        if (!(alpha > 0.0)) throw ConfigError("policy: alpha must be > 0");
        return FixedRate{alpha};
    }
    if (type == "line_search") {
        LineSearch ls;
        ls.alpha0 = j.value("alpha0", 1.0);
        ls.shrink = j.value("shrink", 0.5);
        ls.armijo_c = j.value("armijo_c", 1e-4);
        ls.max_backtracks = j.value("max_backtracks", 40);
        if (!(ls.alpha0 > 0.0)) throw ConfigError("policy: alpha0 must be > 0");
        if (!(ls.shrink > 0.0 && ls.shrink < 1.0))
            throw ConfigError("policy: shrink must be in (0,1)");
        if (!(ls.armijo_c > 0.0 && ls.armijo_c < 1.0))
            throw ConfigError("policy: armijo_c must be in (0,1)");
        if (ls.max_backtracks < 1)
            throw ConfigError("policy: max_backtracks must be >= 1");
        return ls;
    }
    throw ConfigError("policy: unknown type " + type);
}

} // namespace

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["model"] = {{"id", cfg.model_id}, {"width", cfg.width}, {"beta", cfg.beta}};
    j["dataset"] = dataset_spec_to_json(cfg.dataset);
    json methods = json::array();
    for (MetricKind k : cfg.methods) methods.push_back(metric_name(k));
    j["methods"] = methods;
    j["policy"] = policy_to_json(cfg.policy);
    if (cfg.lambda)
        j["lambda"] = *cfg.lambda;
    else
        j["lambda"] = "auto";
    j["iterations"] = cfg.iterations;
    j["batch_size"] = cfg.batch_size;
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    try {
        ExperimentConfig cfg;
        const json& m = j.at("model");
        cfg.model_id = m.at("id").get<std::string>();
        cfg.width = m.value("width", std::size_t{16});
        cfg.beta = m.value("beta", 1.0);
        cfg.dataset = dataset_spec_from_json(j.at("dataset"));
        cfg.methods.clear();
        for (const auto& name : j.value("methods", json::array()))
            cfg.methods.push_back(metric_from_name(name.get<std::string>()));
        cfg.policy = policy_from_json(j.at("policy"));
        if (j.contains("lambda")) {
            if (j.at("lambda").is_string()) {
                if (j.at("lambda").get<std::string>() != "auto")
                    throw ConfigError(
                        "config: lambda must be a number or \"auto\"");
            } else {
                cfg.lambda = j.at("lambda").get<double>();
                if (*cfg.lambda < 0.0)
                    throw ConfigError("config: lambda must be >= 0");
            }
        }
        cfg.iterations = j.value("iterations", 100);
        if (cfg.iterations < 1)
            throw ConfigError("config: iterations must be >= 1");
        cfg.batch_size = j.value("batch_size", std::size_t{32});
        if (cfg.batch_size < 1)
            throw ConfigError("config: batch_size must be >= 1");
        cfg.out_dir = j.value("out_dir", std::string("out"));
        cfg.seed = j.value("seed", std::uint64_t{0});
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    const std::uint64_t h = hash_label(dump);
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

// --- trace CSV ---------------------------------------------------------------

static constexpr const char* kTraceHeader =
    "iter,loss,grad_norm,alpha,step_norm,constraint,lambda_used,wall_ms";

void write_trace_csv(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open trace file for writing: " + path);
    out << kTraceHeader << "\n";
    char line[320];
    for (const TraceRow& r : trace.rows) {
        std::snprintf(line, sizeof line,
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter,
                      r.loss, r.grad_norm, r.alpha, r.step_norm, r.constraint,
                      r.lambda_used, r.wall_ms);
        out << line;
    }
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedTrace("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw MalformedTrace("bad trace header in " + path);
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TraceRow r;
        double iter_val = 0.0;
        double* fields[8] = {&iter_val,     &r.loss,       &r.grad_norm,
                             &r.alpha,      &r.step_norm,  &r.constraint,
                             &r.lambda_used, &r.wall_ms};
        const char* p = line.c_str();
        for (int f = 0; f < 8; ++f) {
            char* end = nullptr;
            *fields[f] = std::strtod(p, &end);
            if (end == p)
                throw MalformedTrace("bad numeric field in " + path);
            p = end;
            if (f < 7) {
                if (*p != ',')
                    throw MalformedTrace("expected 8 columns in " + path);
                ++p;
            }
        }
        r.iter = static_cast<int>(iter_val);
        rows.push_back(r);
    }
    if (rows.empty()) throw MalformedTrace("trace has no rows: " + path);
    return rows;
}

// --- experiment runner ---------------------------------------------------------

bool ExperimentResult::all_failed() const {
    return !outcomes.empty() &&
           std::none_of(outcomes.begin(), outcomes.end(),
                        [](const MethodOutcome& o) { return o.ok; });
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const Dataset ds = generate_dataset(cfg.dataset);
    const std::unique_ptr<Model> model = make_model(
        cfg.model_id, ds.input_dim(), ds.output_dim(), cfg.width, cfg.beta);
    if (cfg.batch_size > ds.samples.size())
        throw ConfigError("config: batch_size exceeds dataset size");

    std::filesystem::create_directories(cfg.out_dir);

    std::vector<MetricKind> methods =
        cfg.methods.empty() ? all_metric_kinds() : cfg.methods;

    ExperimentResult result;
    result.out_dir = cfg.out_dir;

    using clock = std::chrono::steady_clock;
    for (MetricKind kind : methods) {
        MethodOutcome outcome;
        outcome.kind = kind;
        const std::string name = metric_name(kind);
        const auto t0 = clock::now();
        try {
            DescentConfig dc;
            dc.kind = kind;
            dc.policy = cfg.policy;
            dc.lambda = cfg.lambda;
            dc.iterations = cfg.iterations;
            dc.batch_size = cfg.batch_size;
            dc.seed = derive_seed(cfg.seed, name);
            const Trace trace = run_descent(*model, ds.samples, dc);

            const std::string file = "trace_" + name + ".csv";
            write_trace_csv(trace,
                            (std::filesystem::path(cfg.out_dir) / file)
                                .string());
            outcome.trace_file = file;
            outcome.final_loss =
                batch_loss(*model, trace.final_theta, ds.samples);
            outcome.ok = true;
        } catch (const Error& e) {
            outcome.error = std::string(name) + ": " + e.what();
        }
        outcome.wall_ms =
            std::chrono::duration<double, std::milli>(clock::now() - t0)
                .count();
        result.outcomes.push_back(std::move(outcome));
    }

    json manifest;
    manifest["config"] = config_to_json(cfg);
    manifest["config_hash"] = config_hash_hex(cfg);
    manifest["library_version"] = kLibraryVersion;
    json methods_j;
    for (const MethodOutcome& o : result.outcomes) {
        json mj;
        if (o.ok) {
            mj["status"] = "ok";
            mj["final_loss"] = o.final_loss;
            mj["trace"] = o.trace_file;
        } else {
            mj["status"] = "error";
            mj["error"] = o.error;
        }
        mj["wall_ms"] = o.wall_ms;
        methods_j[metric_name(o.kind)] = mj;
    }
    manifest["methods"] = methods_j;

    result.manifest_file =
        (std::filesystem::path(cfg.out_dir) / "manifest.json").string();
    std::ofstream out(result.manifest_file, std::ios::binary);
    if (!out) throw Error("cannot write manifest: " + result.manifest_file);
    out << manifest.dump(2) << "\n";
    return result;
}

// --- compare -------------------------------------------------------------------

std::string compare_traces(const std::vector<std::string>& paths,
                           std::optional<double> threshold) {
    if (paths.empty()) throw Error("compare: no trace files given");

    struct Row {
        std::string label;
        double final_loss;
        int iters_to_threshold; // -1 = never reached
        double mean_alpha;
        double mean_lambda;
        std::vector<TraceRow> rows;
    };
    std::vector<Row> table;

    double best_loss = std::numeric_limits<double>::infinity();
    for (const std::string& path : paths) {
        Row row;
        std::string stem = std::filesystem::path(path).stem().string();
        if (stem.rfind("trace_", 0) == 0) stem = stem.substr(6);
        row.label = stem;
        row.rows = read_trace_csv(path);
        row.final_loss = row.rows.back().loss;
        double sa = 0.0, sl = 0.0;
        for (const TraceRow& r : row.rows) {
            sa += r.alpha;
            sl += r.lambda_used;
            best_loss = std::min(best_loss, r.loss);
        }
        row.mean_alpha = sa / static_cast<double>(row.rows.size());
        row.mean_lambda = sl / static_cast<double>(row.rows.size());
        row.iters_to_threshold = -1;
        table.push_back(std::move(row));
    }

    const double thresh = threshold.value_or(1.05 * best_loss);
    for (Row& row : table)
        for (const TraceRow& r : row.rows)
            if (r.loss <= thresh) {
                row.iters_to_threshold = r.iter;
                break;
            }

    std::stable_sort(table.begin(), table.end(),
                     [](const Row& a, const Row& b) {
                         return a.final_loss < b.final_loss;
                     });

    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %-14s %-16s %-12s %-12s\n",
                  "method", "final_loss", "iters_to_thresh", "mean_alpha",
                  "mean_lambda");
    out << line;
    std::snprintf(line, sizeof line, "(threshold: loss <= %.6g)\n", thresh);
    out << line;
    for (const Row& row : table) {
        char iters[24];
        if (row.iters_to_threshold >= 0)
            std::snprintf(iters, sizeof iters, "%d", row.iters_to_threshold);
        else
            std::snprintf(iters, sizeof iters, "-");
        std::snprintf(line, sizeof line, "%-12s %-14.6g %-16s %-12.6g %-12.6g\n",
                      row.label.c_str(), row.final_loss, iters, row.mean_alpha,
                      row.mean_lambda);
        out << line;
    }
    return out.str();
}

// --- step-geometry demo ----------------------------------------------------------

StepGeometry demo_step_geometry(const Vec& g, const SymMatrix& m, double eps) {
    if (g.size() != m.dim())
        throw DimensionMismatch("demo: gradient and metric dims differ");
    if (!(eps > 0.0)) throw Error("demo: epsilon must be > 0");
    const double gnorm = norm(g);
    if (gnorm == 0.0) throw Error("demo: gradient must be non-zero");

    StepGeometry geo;
    geo.vanilla_step.resize(g.size());
    const double alpha_vanilla = eps / gnorm;
    for (std::size_t i = 0; i < g.size(); ++i)
        geo.vanilla_step[i] = -alpha_vanilla * g[i];

    const SpdFactor f = cholesky_spd(m); // throws NotPositiveDefinite
    const Vec p = spd_solve(f, g);
    const double alpha_metric = eps / std::sqrt(dot(g, p));
    geo.metric_step.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        geo.metric_step[i] = -alpha_metric * p[i];

    double c = dot(geo.vanilla_step, geo.metric_step) /
               (norm(geo.vanilla_step) * norm(geo.metric_step));
    c = std::clamp(c, -1.0, 1.0);
    geo.angle_deg = std::acos(c) * 180.0 / std::numbers::pi;
    return geo;
}

std::string format_step_geometry(const StepGeometry& geo, bool as_csv) {
    std::ostringstream out;
    char buf[96];
    if (as_csv) {
        out << "step,component,value\n";
        for (std::size_t i = 0; i < geo.vanilla_step.size(); ++i) {
            std::snprintf(buf, sizeof buf, "vanilla,%zu,%.17g\n", i,
                          geo.vanilla_step[i]);
            out << buf;
        }
        for (std::size_t i = 0; i < geo.metric_step.size(); ++i) {
            std::snprintf(buf, sizeof buf, "metric,%zu,%.17g\n", i,
                          geo.metric_step[i]);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "angle_deg,,%.17g\n", geo.angle_deg);
        out << buf;
        return out.str();
    }
    auto print_vec = [&](const char* label, const Vec& v) {
        out << label << " = (";
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.10g", i ? ", " : "", v[i]);
            out << buf;
        }
        out << ")  |step| = ";
        std::snprintf(buf, sizeof buf, "%.10g\n", norm(v));
        out << buf;
    };
    print_vec("vanilla step (M = I)", geo.vanilla_step);
    print_vec("metric step        ", geo.metric_step);
    std::snprintf(buf, sizeof buf, "angle between steps = %.6g deg\n",
                  geo.angle_deg);
    out << buf;
    return out.str();
}

// --- dataset export ------------------------------------------------------------

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open dataset file for writing: " + path);
    const std::size_t din = ds.input_dim(), dout = ds.output_dim();
    for (std::size_t i = 0; i < din; ++i) out << (i ? "," : "") << "x" << i;
    for (std::size_t i = 0; i < dout; ++i) out << ",y" << i;
    out << "\n";
    char buf[40];
    for (const Sample& s : ds.samples) {
        for (std::size_t i = 0; i < din; ++i) {
            std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", s.x[i]);
            out << buf;
        }
        for (std::size_t i = 0; i < dout; ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g", s.y[i]);
            out << buf;
        }
        out << "\n";
    }
}

} // namespace metricgd
