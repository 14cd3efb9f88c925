#pragma once

#include <cstdint>
#include <random>

namespace entangle {

// One SplitMix64 output for the given state word.
std::uint64_t splitmix64(std::uint64_t x);

// Seed word for substream `stream` of `master_seed`.
// Defined as splitmix64(master_seed + stream * 0x9E3779B97F4A7C15);
// every parallel or per-item stream in this project is derived this way,
// so results are independent of evaluation order and thread count.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream);

// Engine seeded with derive_seed(master_seed, stream).
std::mt19937_64 seeded_engine(std::uint64_t master_seed, std::uint64_t stream = 0);

// Uniform double in [0,1) with 53-bit resolution.
double uniform01(std::mt19937_64& rng);

// Standard normal via Box-Muller. Draws exactly two uniforms per call.
double gaussian(std::mt19937_64& rng);

// Poisson sample. CDF inversion below mean 30, transformed rejection above,
// so the cost stays O(1) for the large means used by high-flux simulations.
std::int64_t poisson(std::mt19937_64& rng, double mean);

} // namespace entangle
