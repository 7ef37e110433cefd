#pragma once

#include <cstdint>
#include <random>

namespace packwise {

/// Seeded generator with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard library distributions are not, so the variates
/// below are derived from raw engine output by hand:
///   - uniform_index: rejection sampling on the top bits (no modulo bias)
///   - uniform01:     53 high bits scaled into [0, 1)
///   - normal:        Box-Muller, one variate per call, no caching
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    double uniform01();

    bool bernoulli(double p) { return uniform01() < p; }

    double normal(double mean, double sigma);

private:
    std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream index so sibling runs get unrelated streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace packwise
