#pragma once

#include <cstdint>
#include <random>

namespace qrng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent sub-seed for a named stream of a run. Every random draw in the
/// toolchain descends from one user seed through this function.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0xA0761D6478BD642FULL));
}

/// mt19937_64 is fully specified by the standard, so engines are portable.
using Engine = std::mt19937_64;

}  // namespace qrng
