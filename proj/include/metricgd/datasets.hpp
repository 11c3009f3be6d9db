#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "metricgd/models.hpp"

namespace metricgd {

/// Generator parameters. Regenerating from an identical spec is
/// bit-identical, so datasets never need to be persisted alongside results.
struct DatasetSpec {
    std::string name; // "linreg" | "sine" | "spiral3"
    std::size_t n = 0;
    double noise = 0.0;
    std::size_t input_dim = 0;  // linreg only; sine is 1-D, spiral3 is 2-D
    std::size_t output_dim = 0; // linreg only; defaults to input_dim
    std::uint64_t seed = 0;

    /// Optional explicit affine map for linreg (library use); when absent
    /// the map is drawn from the seeded stream.
    std::optional<Matrix> linreg_a;
    std::optional<Vec> linreg_b;
};

struct Dataset {
    DatasetSpec spec; // normalized (dims filled in)
    std::vector<Sample> samples;

    std::size_t input_dim() const { return samples.front().x.size(); }
    std::size_t output_dim() const { return samples.front().y.size(); }
};

/// Synthetic data:
///   linreg  — y = A x + b + noise * eps, x uniform in [-1, 1]^d
///   sine    — scalar y = sin(2 pi x) + noise * eps, x uniform in [-1, 1]
///   spiral3 — three interleaved 2-D spiral arms, one-hot labels,
///             coordinate noise
/// Throws UnknownSpec for any other name.
Dataset generate_dataset(const DatasetSpec& spec);

} // namespace metricgd
