#pragma once

#include <cstdint>
#include <random>

namespace poissonloc {

/// splitmix64 finalizer; used to derive well-separated streams from a root
/// seed and a handful of integer labels.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based stream label: (root, replication, sensor) triples map to
/// independent generator states, so replications can run concurrently with
/// no shared generator.
struct SimulationSeed {
    std::uint64_t root = 0;
    std::uint64_t replication = 0;

    /// Derived engine for one (replication, sensor, facet) stream. `facet`
    /// separates independent sub-draws inside one logical stream.
    std::mt19937_64 stream(std::uint64_t sensor, std::uint64_t facet = 0) const {
        std::uint64_t s = mix64(root ^ mix64(replication ^ mix64(sensor ^ mix64(facet))));
        return std::mt19937_64(s);
    }
};

/// Uniform on [0,1) with 53-bit resolution.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard exponential via inversion; never returns inf (log of (0,1]).
inline double exponential1(std::mt19937_64& eng) {
    return -std::log(1.0 - uniform01(eng));
}

/// Poisson count with the given mean.
inline long long poisson(std::mt19937_64& eng, double mean) {
    std::poisson_distribution<long long> d(mean);
    return d(eng);
}

}  // namespace poissonloc
