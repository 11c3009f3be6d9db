// bench-cli: generate datasets, run descent experiments over the six
// methods, summarize traces, and print the step-geometry demo.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure (every
// requested method failed).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "metricgd/experiment.hpp"

namespace {

using namespace metricgd;

int cmd_gen(const DatasetSpec& spec, const std::string& out_dir) {
    const Dataset ds = generate_dataset(spec);
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    write_dataset_csv(ds, (dir / "dataset.csv").string());
    std::ofstream meta((dir / "dataset.json").string(), std::ios::binary);
    if (!meta) throw Error("cannot write dataset metadata");
    meta << dataset_spec_to_json(ds.spec).dump(2) << "\n";
    std::printf("wrote %zu samples (%zu -> %zu) to %s\n", ds.samples.size(),
                ds.input_dim(), ds.output_dim(),
                (dir / "dataset.csv").c_str());
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            std::optional<std::uint64_t> seed_override,
            const std::vector<std::string>& methods_override) {
    ExperimentConfig cfg = load_config_file(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override) cfg.seed = *seed_override;
    if (!methods_override.empty()) {
        cfg.methods.clear();
        for (const std::string& name : methods_override)
            cfg.methods.push_back(metric_from_name(name));
    }

    const ExperimentResult result = run_experiment(cfg);
    for (const MethodOutcome& o : result.outcomes) {
        if (o.ok)
            std::printf("%-8s final loss %.6g  (%s, %.0f ms)\n",
                        metric_name(o.kind), o.final_loss,
                        o.trace_file.c_str(), o.wall_ms);
        else
            std::printf("%-8s FAILED: %s\n", metric_name(o.kind),
                        o.error.c_str());
    }
    std::printf("manifest: %s\n", result.manifest_file.c_str());
    return result.all_failed() ? 3 : 0;
}

int cmd_compare(const std::vector<std::string>& traces,
                std::optional<double> threshold) {
    std::cout << compare_traces(traces, threshold);
    return 0;
}

int cmd_demo(const std::vector<double>& g, const std::vector<double>& m,
             double eps, bool as_csv) {
    std::vector<double> buf = {m[0], m[1], m[1], m[2]};
    const SymMatrix metric = SymMatrix::from_upper(2, std::move(buf));
    const StepGeometry geo = demo_step_geometry(Vec{g[0], g[1]}, metric, eps);
    std::cout << format_step_geometry(geo, as_csv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"benchmark harness for metric-constrained gradient descent"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    DatasetSpec spec;
    std::string gen_out = "data";
    gen->add_option("--spec", spec.name, "linreg | sine | spiral3")
        ->required();
    gen->add_option("--n", spec.n, "number of samples")->required();
    gen->add_option("--noise", spec.noise, "noise level");
    gen->add_option("--input-dim", spec.input_dim, "input dim (linreg)");
    gen->add_option("--output-dim", spec.output_dim, "output dim (linreg)");
    gen->add_option("--seed", spec.seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory");

    // run
    auto* run = app.add_subcommand("run", "run a configured experiment");
    std::string config_path, run_out;
    std::uint64_t run_seed = 0;
    bool have_seed = false;
    std::vector<std::string> run_methods;
    run->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    run->add_option("--out", run_out, "override output directory");
    run->add_option("--seed", run_seed, "override master seed")
        ->each([&](const std::string&) { have_seed = true; });
    run->add_option("--methods", run_methods,
                    "override method list (vanilla,cgn,fisher,gradcov,newton,ggn)")
        ->delimiter(',');

    // compare
    auto* cmp = app.add_subcommand("compare", "summarize trace files");
    std::vector<std::string> traces;
    double threshold = 0.0;
    bool have_threshold = false;
    cmp->add_option("traces", traces, "trace CSV files")->required();
    cmp->add_option("--threshold", threshold, "loss threshold")
        ->each([&](const std::string&) { have_threshold = true; });

    // demo
    auto* demo = app.add_subcommand(
        "demo", "show how a metric reshapes one gradient step");
    std::vector<double> demo_g, demo_m;
    double demo_eps = 0.1;
    bool demo_csv = false;
    demo->add_option("--g", demo_g, "gradient gx,gy")
        ->delimiter(',')
        ->expected(2)
        ->required();
    demo->add_option("--metric", demo_m, "SPD metric m00,m01,m11")
        ->delimiter(',')
        ->expected(3)
        ->required();
    demo->add_option("--eps", demo_eps, "constraint bound");
    demo->add_flag("--csv", demo_csv, "CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // flag misuse is a config error
    }

    try {
        if (gen->parsed()) return cmd_gen(spec, gen_out);
        if (run->parsed())
            return cmd_run(config_path, run_out,
                           have_seed ? std::optional<std::uint64_t>(run_seed)
                                     : std::nullopt,
                           run_methods);
        if (cmp->parsed())
            return cmd_compare(traces, have_threshold
                                           ? std::optional<double>(threshold)
                                           : std::nullopt);
        if (demo->parsed()) return cmd_demo(demo_g, demo_m, demo_eps, demo_csv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownSpec& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const MetricFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
