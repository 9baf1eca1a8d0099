// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

// Deterministic seeding hierarchy for ensemble runs.  Each cavity draws
// from its own substream; the child seed derivation is part of the file
// format contract and must not change.

namespace cavscat::rng {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Substream seed for cavity `index` under `master_seed`:
/// mix64(master_seed ^ ((index + 1) * 0x9E3779B97F4A7C15)).
inline std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(master_seed ^ ((index + 1) * 0x9E3779B97F4A7C15ULL));
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every
/// platform for a given engine state.
template <class Engine>
double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
template <class Engine>
double uniform(Engine& eng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(eng);
}

using engine = std::mt19937_64;

} // namespace cavscat::rng
