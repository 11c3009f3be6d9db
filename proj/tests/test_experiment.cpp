#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "metricgd/experiment.hpp"
#include "support.hpp"

using namespace metricgd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("metricgd_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// columns 0..6; wall_ms (column 7) is timing and legitimately differs
std::string strip_wall_ms(const std::string& line) {
    const auto pos = line.rfind(',');
    return line.substr(0, pos);
}

ExperimentConfig small_config(const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.model_id = "linear_gaussian";
    cfg.beta = 1.0;
    cfg.dataset = {.name = "linreg",
                   .n = 32,
                   .noise = 0.0,
                   .input_dim = 2,
                   .output_dim = 2,
                   .seed = 3};
    cfg.methods = {MetricKind::Identity};
    cfg.policy = LineSearch{};
    cfg.iterations = 200;
    cfg.batch_size = 32;
    cfg.out_dir = out_dir;
    cfg.seed = 17;
    return cfg;
}

} // namespace

TEST_CASE("noiseless identity-map linreg reproduces y = x") {
    DatasetSpec spec{.name = "linreg",
                     .n = 4,
                     .noise = 0.0,
                     .input_dim = 3,
                     .output_dim = 3,
                     .seed = 1};
    spec.linreg_a = Matrix::identity(3);
    spec.linreg_b = Vec(3, 0.0);
    const Dataset ds = generate_dataset(spec);
    REQUIRE(ds.samples.size() == 4);
    for (const Sample& s : ds.samples)
        for (std::size_t i = 0; i < 3; ++i) CHECK(s.y[i] == s.x[i]);
}

TEST_CASE("dataset regeneration is bit-identical") {
    for (const char* name : {"linreg", "sine", "spiral3"}) {
        DatasetSpec spec{.name = name, .n = 64, .noise = 0.2, .seed = 99};
        const Dataset a = generate_dataset(spec);
        const Dataset b = generate_dataset(spec);
        REQUIRE(a.samples.size() == b.samples.size());
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            CHECK(a.samples[i].x == b.samples[i].x);
            CHECK(a.samples[i].y == b.samples[i].y);
        }
        // different seed, different data
        spec.seed = 100;
        const Dataset c = generate_dataset(spec);
        CHECK(c.samples[0].x != a.samples[0].x);
    }
}

TEST_CASE("sine output variance sits near 1/2 plus the noise floor") {
    const Dataset ds = generate_dataset(
        {.name = "sine", .n = 256, .noise = 0.1, .seed = 7});
    double mean = 0.0;
    for (const Sample& s : ds.samples) mean += s.y[0];
    mean /= 256.0;
    double var = 0.0;
    for (const Sample& s : ds.samples)
        var += (s.y[0] - mean) * (s.y[0] - mean);
    var /= 256.0;
    CHECK(var >= 0.3);
    CHECK(var <= 0.8);
    CHECK(ds.input_dim() == 1);
}

TEST_CASE("spiral3 labels are balanced one-hot 2-D classes") {
    const Dataset ds = generate_dataset(
        {.name = "spiral3", .n = 30, .noise = 0.05, .seed = 4});
    std::size_t counts[3] = {0, 0, 0};
    for (const Sample& s : ds.samples) {
        REQUIRE(s.x.size() == 2);
        REQUIRE(s.y.size() == 3);
        double sum = 0.0;
        for (double v : s.y) {
            CHECK((v == 0.0 || v == 1.0));
            sum += v;
        }
        CHECK(sum == 1.0);
        for (std::size_t k = 0; k < 3; ++k)
            if (s.y[k] == 1.0) ++counts[k];
    }
    CHECK(counts[0] == 10);
    CHECK(counts[1] == 10);
    CHECK(counts[2] == 10);
}

TEST_CASE("dataset spec validation") {
    CHECK_THROWS_AS(generate_dataset({.name = "mnist", .n = 8}), UnknownSpec);
    CHECK_THROWS_AS(generate_dataset({.name = "sine", .n = 0}), ConfigError);
    CHECK_THROWS_AS(generate_dataset({.name = "sine", .n = 4, .noise = -1.0}),
                    ConfigError);
}

TEST_CASE("config JSON round-trips losslessly") {
    ExperimentConfig cfg;
    cfg.model_id = "softmax";
    cfg.width = 6;
    cfg.beta = 1.0;
    cfg.dataset = {.name = "spiral3", .n = 120, .noise = 0.05, .seed = 5};
    cfg.methods = {MetricKind::GradientCovariance, MetricKind::Hessian};
    cfg.policy = TrustRegion{0.02};
    cfg.lambda = 1e-5;
    cfg.iterations = 50;
    cfg.batch_size = 30;
    cfg.out_dir = "results";
    cfg.seed = 99;

    const ExperimentConfig back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(config_hash_hex(back) == config_hash_hex(cfg));

    // auto damping survives the trip as well
    cfg.lambda.reset();
    const ExperimentConfig back2 = config_from_json(config_to_json(cfg));
    CHECK_FALSE(back2.lambda.has_value());
    CHECK(config_to_json(back2) == config_to_json(cfg));
    CHECK(config_hash_hex(back2) != config_hash_hex(back));
}

TEST_CASE("config parsing rejects bad values") {
    ExperimentConfig good = small_config("x");
    nlohmann::json j = config_to_json(good);

    nlohmann::json bad = j;
    bad["policy"]["type"] = "momentum";
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);

    bad = j;
    bad["policy"] = {{"type", "trust_region"}, {"epsilon", -1.0}};
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);

    bad = j;
    bad["methods"] = {"sgd"};
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);

    bad = j;
    bad.erase("model");
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);

    bad = j;
    bad["iterations"] = 0;
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);

    CHECK_THROWS_AS(load_config_file("/nonexistent/cfg.json"), ConfigError);
}

TEST_CASE("trace CSV round-trip and schema") {
    const fs::path dir = temp_dir("trace");
    Trace t;
    t.model_id = "linear_gaussian";
    t.kind = MetricKind::ClassicalGaussNewton;
    t.rows.push_back({0, 0.123456789012345678, 1e-3, 0.5, 0.01, 2.5e-5,
                      1e-6, 3.25});
    t.rows.push_back({1, 6.02214076e23, 2.2250738585072014e-308, 1.0, 0.0,
                      0.0, 0.0, 0.0});
    const std::string path = (dir / "trace_cgn.csv").string();
    write_trace_csv(t, path);

    const auto lines = read_lines(path);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] ==
          "iter,loss,grad_norm,alpha,step_norm,constraint,lambda_used,wall_ms");
    for (const std::string& l : lines) CHECK(l.find('\r') == std::string::npos);

    const auto rows = read_trace_csv(path);
    REQUIRE(rows.size() == 2);
    // %.17g round-trips doubles exactly
    CHECK(rows[0].loss == t.rows[0].loss);
    CHECK(rows[1].loss == t.rows[1].loss);
    CHECK(rows[1].grad_norm == t.rows[1].grad_norm);
    CHECK(rows[0].wall_ms == t.rows[0].wall_ms);
}

TEST_CASE("malformed traces are rejected") {
    const fs::path dir = temp_dir("badtrace");
    {
        std::ofstream out(dir / "bad1.csv", std::ios::binary);
        out << "iter,loss\n0,1\n";
    }
    CHECK_THROWS_AS(read_trace_csv((dir / "bad1.csv").string()),
                    MalformedTrace);
    {
        std::ofstream out(dir / "bad2.csv", std::ios::binary);
        out << "iter,loss,grad_norm,alpha,step_norm,constraint,lambda_used,"
               "wall_ms\n0,1,2\n";
    }
    CHECK_THROWS_AS(read_trace_csv((dir / "bad2.csv").string()),
                    MalformedTrace);
    CHECK_THROWS_AS(read_trace_csv((dir / "missing.csv").string()),
                    MalformedTrace);
}

TEST_CASE("vanilla descent drives noiseless linreg to tiny loss") {
    const fs::path dir = temp_dir("linreg_vanilla");
    const ExperimentConfig cfg = small_config(dir.string());
    const ExperimentResult res = run_experiment(cfg);
    REQUIRE(res.outcomes.size() == 1);
    CHECK(res.outcomes[0].ok);
    CHECK(res.outcomes[0].final_loss <= 1e-6);
}

TEST_CASE("one Newton iteration lands at the quadratic floor") {
    const fs::path dir = temp_dir("linreg_newton");
    ExperimentConfig cfg = small_config(dir.string());
    cfg.methods = {MetricKind::Hessian};
    cfg.policy = FixedRate{1.0};
    cfg.lambda = 0.0;
    cfg.iterations = 2;
    const ExperimentResult res = run_experiment(cfg);
    REQUIRE(res.outcomes[0].ok);
    const auto rows = read_trace_csv(
        (dir / res.outcomes[0].trace_file).string());
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].loss <= 1e-24); // loss recorded after the first step
    CHECK(res.outcomes[0].final_loss <= 1e-24);
}

TEST_CASE("traces are byte-reproducible apart from wall time") {
    const fs::path dir_a = temp_dir("repro_a");
    const fs::path dir_b = temp_dir("repro_b");
    ExperimentConfig cfg = small_config(dir_a.string());
    cfg.methods = {MetricKind::Identity, MetricKind::ClassicalGaussNewton,
                   MetricKind::Hessian};
    cfg.iterations = 25;
    cfg.batch_size = 8; // exercise the shuffled batch stream
    run_experiment(cfg);
    cfg.out_dir = dir_b.string();
    run_experiment(cfg);

    for (const char* name : {"trace_vanilla.csv", "trace_cgn.csv",
                             "trace_newton.csv"}) {
        const auto a = read_lines(dir_a / name);
        const auto b = read_lines(dir_b / name);
        REQUIRE(a.size() == b.size());
        CHECK(a.size() == 26); // header + 25 rows
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(strip_wall_ms(a[i]) == strip_wall_ms(b[i]));
    }
}

TEST_CASE("manifest records config hash and per-method results") {
    const fs::path dir = temp_dir("manifest");
    ExperimentConfig cfg = small_config(dir.string());
    cfg.methods = {MetricKind::Identity, MetricKind::GeneralizedGaussNewton};
    cfg.iterations = 10;
    const ExperimentResult res = run_experiment(cfg);
    CHECK_FALSE(res.all_failed());

    std::ifstream in(res.manifest_file);
    REQUIRE(in.good());
    nlohmann::json manifest;
    in >> manifest;
    CHECK(manifest.at("config_hash").get<std::string>() ==
          config_hash_hex(cfg));
    CHECK(manifest.at("library_version").get<std::string>() ==
          kLibraryVersion);
    CHECK(manifest.at("methods").contains("vanilla"));
    CHECK(manifest.at("methods").contains("ggn"));
    CHECK(manifest.at("methods").at("vanilla").at("status") == "ok");
    CHECK(manifest.at("methods").at("vanilla").at("final_loss").is_number());
    // sub-seeds differ per method, so the streams are independent
    CHECK(manifest.at("config").at("seed").get<std::uint64_t>() == cfg.seed);
}

TEST_CASE("divergence is recorded honestly in the trace") {
    const fs::path dir = temp_dir("divergent");
    ExperimentConfig cfg = small_config(dir.string());
    cfg.model_id = "mlp_gaussian";
    cfg.width = 4;
    cfg.dataset = {.name = "sine", .n = 32, .noise = 0.0, .seed = 2};
    cfg.methods = {MetricKind::Identity};
    cfg.policy = FixedRate{1e8}; // guaranteed blow-up
    cfg.iterations = 30;
    cfg.batch_size = 32;
    const ExperimentResult res = run_experiment(cfg);
    // the run completes; the trace and manifest carry the inf loss
    REQUIRE(res.outcomes.size() == 1);
    CHECK(res.outcomes[0].ok);
    CHECK(std::isinf(res.outcomes[0].final_loss));
    const auto rows =
        read_trace_csv((dir / res.outcomes[0].trace_file).string());
    CHECK(std::isinf(rows.back().loss));
}

TEST_CASE("all_failed accounting") {
    ExperimentResult res;
    CHECK_FALSE(res.all_failed()); // vacuously: nothing ran, nothing failed
    MethodOutcome bad;
    bad.ok = false;
    bad.error = "numeric failure";
    res.outcomes.push_back(bad);
    CHECK(res.all_failed());
    MethodOutcome good;
    good.ok = true;
    res.outcomes.push_back(good);
    CHECK_FALSE(res.all_failed());
}

TEST_CASE("compare summarizes and ranks traces") {
    const fs::path dir = temp_dir("compare");
    ExperimentConfig cfg = small_config(dir.string());
    cfg.methods = {MetricKind::Identity, MetricKind::Hessian};
    cfg.iterations = 40;
    run_experiment(cfg);

    const std::string vanilla = (dir / "trace_vanilla.csv").string();
    const std::string newton = (dir / "trace_newton.csv").string();

    const std::string single = compare_traces({vanilla});
    CHECK(single.find("vanilla") != std::string::npos);

    const std::string both = compare_traces({vanilla, newton});
    // newton converges faster, so it sorts first
    const auto newton_pos = both.find("newton");
    const auto vanilla_pos = both.find("vanilla");
    REQUIRE(newton_pos != std::string::npos);
    REQUIRE(vanilla_pos != std::string::npos);
    CHECK(newton_pos < vanilla_pos);

    // same rows twice produce identical lines
    const std::string twice = compare_traces({vanilla, vanilla});
    std::istringstream ss(twice);
    std::string header, thresh, r1, r2;
    std::getline(ss, header);
    std::getline(ss, thresh);
    std::getline(ss, r1);
    std::getline(ss, r2);
    CHECK(r1 == r2);

    CHECK_THROWS_AS(compare_traces({}), Error);
}

TEST_CASE("newton reaches the loss threshold in fewer iterations") {
    const fs::path dir = temp_dir("race");
    ExperimentConfig cfg = small_config(dir.string());
    cfg.methods = {MetricKind::Identity, MetricKind::Hessian};
    cfg.iterations = 60;
    run_experiment(cfg);

    auto iters_to = [&](const char* file, double thresh) {
        const auto rows = read_trace_csv((dir / file).string());
        for (const TraceRow& r : rows)
            if (r.loss <= thresh) return r.iter;
        return -1;
    };
    const int newton = iters_to("trace_newton.csv", 1e-8);
    const int vanilla = iters_to("trace_vanilla.csv", 1e-8);
    REQUIRE(newton >= 0);
    CHECK((vanilla == -1 || newton < vanilla));
}

TEST_CASE("loss is non-increasing on a full-batch convex problem") {
    const fs::path dir = temp_dir("monotone");
    ExperimentConfig cfg = small_config(dir.string());
    cfg.methods = {MetricKind::Identity, MetricKind::ClassicalGaussNewton};
    cfg.policy = TrustRegion{1e-2};
    cfg.iterations = 40; // stays well away from the constant-step orbit zone
    const ExperimentResult res = run_experiment(cfg);
    for (const MethodOutcome& o : res.outcomes) {
        REQUIRE(o.ok);
        const auto rows = read_trace_csv((dir / o.trace_file).string());
        for (std::size_t i = 1; i < rows.size(); ++i)
            CHECK(rows[i].loss <= rows[i - 1].loss);
    }
}

TEST_CASE("step geometry demo") {
    // M = I: both steps coincide
    const StepGeometry same =
        demo_step_geometry({1.0, 2.0}, SymMatrix::identity(2), 0.5);
    CHECK(same.angle_deg == doctest::Approx(0.0));
    CHECK(norm(same.vanilla_step) == doctest::Approx(0.5));

    // diagonal anisotropy along the gradient: direction kept, length halved
    const StepGeometry diag =
        demo_step_geometry({1.0, 0.0}, SymMatrix::diagonal({4.0, 1.0}), 0.2);
    CHECK(diag.angle_deg == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(diag.vanilla_step[0] == doctest::Approx(-0.2));
    CHECK(diag.metric_step[0] == doctest::Approx(-0.1));

    // strong anisotropy rotates the step
    const StepGeometry rot =
        demo_step_geometry({1.0, 1.0}, SymMatrix::diagonal({100.0, 1.0}), 0.2);
    CHECK(rot.angle_deg > 30.0);

    CHECK_THROWS_AS(demo_step_geometry({1.0, 0.0},
                                       SymMatrix::diagonal({-1.0, 1.0}), 0.1),
                    NotPositiveDefinite);

    const std::string text = format_step_geometry(rot, false);
    CHECK(text.find("angle between steps") != std::string::npos);
    const std::string csv = format_step_geometry(rot, true);
    CHECK(csv.find("step,component,value") == 0);
}

TEST_CASE("dataset CSV export") {
    const fs::path dir = temp_dir("gen");
    const Dataset ds = generate_dataset(
        {.name = "sine", .n = 10, .noise = 0.0, .seed = 1});
    const std::string path = (dir / "dataset.csv").string();
    write_dataset_csv(ds, path);
    const auto lines = read_lines(path);
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == "x0,y0");
}
