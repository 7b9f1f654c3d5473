#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace eitstore {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so parallel sweeps are reproducible regardless
// of scheduling.

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = mix64(seed ^ mix64(stream ^ mix64(counter)));
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;  // in (0, 1)
}

inline double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const double u1 = counter_uniform(seed, stream, 2 * counter);
    const double u2 = counter_uniform(seed, stream, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace eitstore
