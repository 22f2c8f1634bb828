#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "kale/geometry.hpp"

namespace kale {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Replicate r's generator is a pure function of (master_seed, r).
struct RngSpec {
    std::uint64_t master_seed = 0;

    Rng stream(std::uint64_t replicate) const {
        const std::uint64_t key = splitmix64(splitmix64(master_seed) ^ splitmix64(replicate + 0x632be59bd9b4e019ULL));
        std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                          static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32)};
        return Rng(seq);
    }
};

/// Uniform on [0, 1) from the top 53 bits; one engine call per variate.
inline double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1].
inline double uniform01_open_low(Rng& rng) noexcept { return 1.0 - uniform01(rng); }

/// Pair of independent standard normals by Box-Muller (two engine calls).
inline PlanePoint standard_normal_pair(Rng& rng) noexcept {
    const double u1 = uniform01_open_low(rng);
    const double u2 = uniform01(rng);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return {radius * std::cos(kTwoPi * u2), radius * std::sin(kTwoPi * u2)};
}

} // namespace kale
