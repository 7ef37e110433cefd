#include "packwise/random.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace packwise {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n <= 1) return 0;
    const int bits = 64 - std::countl_zero(n - 1);
    for (;;) {
        const std::uint64_t candidate = bits == 64 ? engine_() : engine_() >> (64 - bits);
        if (candidate < n) return candidate;
    }
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double sigma) {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sigma * z;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace packwise
