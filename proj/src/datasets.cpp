#include "metricgd/datasets.hpp"

#include <cmath>
#include <numbers>

#include "metricgd/rng.hpp"

namespace metricgd {

namespace {

Dataset gen_linreg(DatasetSpec spec) {
    if (spec.input_dim == 0) spec.input_dim = 4;
    if (spec.output_dim == 0) spec.output_dim = spec.input_dim;
    const std::size_t din = spec.input_dim;
    const std::size_t dout = spec.output_dim;

    Rng rng(spec.seed);
    Matrix a(dout, din);
    Vec b(dout, 0.0);
    if (spec.linreg_a) {
        if (spec.linreg_a->rows() != dout || spec.linreg_a->cols() != din)
            throw ConfigError("linreg: explicit A has wrong shape");
        a = *spec.linreg_a;
    } else {
        for (std::size_t i = 0; i < dout * din; ++i)
            a.data()[i] = rng.uniform(-1.0, 1.0);
    }
    if (spec.linreg_b) {
        if (spec.linreg_b->size() != dout)
            throw ConfigError("linreg: explicit b has wrong length");
        b = *spec.linreg_b;
    } else {
        for (double& v : b) v = rng.uniform(-1.0, 1.0);
    }

    Dataset ds;
    ds.spec = spec;
    ds.samples.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        Sample s;
        s.x.resize(din);
        for (double& v : s.x) v = rng.uniform(-1.0, 1.0);
        s.y = a.apply(s.x);
        for (std::size_t j = 0; j < dout; ++j) s.y[j] += b[j];
        if (spec.noise > 0.0)
            for (double& v : s.y) v += spec.noise * rng.normal();
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

Dataset gen_sine(DatasetSpec spec) {
    spec.input_dim = 1;
    spec.output_dim = 1;
    Rng rng(spec.seed);
    Dataset ds;
    ds.spec = spec;
    ds.samples.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        double y = std::sin(2.0 * std::numbers::pi * x);
        if (spec.noise > 0.0) y += spec.noise * rng.normal();
        ds.samples.push_back({{x}, {y}});
    }
    return ds;
}

Dataset gen_spiral3(DatasetSpec spec) {
    spec.input_dim = 2;
    spec.output_dim = 3;
    Rng rng(spec.seed);
    Dataset ds;
    ds.spec = spec;
    ds.samples.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t cls = i % 3;
        const double t = rng.uniform();
        const double r = 0.1 + 0.9 * t;
        const double ang = 3.5 * std::numbers::pi * t +
                           2.0 * std::numbers::pi * static_cast<double>(cls) /
                               3.0;
        Sample s;
        s.x = {r * std::cos(ang), r * std::sin(ang)};
        if (spec.noise > 0.0) {
            s.x[0] += spec.noise * rng.normal();
            s.x[1] += spec.noise * rng.normal();
        }
        s.y.assign(3, 0.0);
        s.y[cls] = 1.0;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

} // namespace

Dataset generate_dataset(const DatasetSpec& spec) {
    if (spec.n == 0) throw ConfigError("dataset: n must be >= 1");
    if (spec.noise < 0.0) throw ConfigError("dataset: noise must be >= 0");
    if (spec.name == "linreg") return gen_linreg(spec);
    if (spec.name == "sine") return gen_sine(spec);
    if (spec.name == "spiral3") return gen_spiral3(spec);
    throw UnknownSpec("unknown dataset spec: " + spec.name);
}

} // namespace metricgd
