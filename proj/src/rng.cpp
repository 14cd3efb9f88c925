#include "entangle/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace entangle {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream) {
  return splitmix64(master_seed + stream * 0x9E3779B97F4A7C15ULL);
}

std::mt19937_64 seeded_engine(std::uint64_t master_seed, std::uint64_t stream) {
  return std::mt19937_64(derive_seed(master_seed, stream));
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::int64_t poisson_inversion(std::mt19937_64& rng, double mean) {
  double u = uniform01(rng);
  double p = std::exp(-mean);
  double cum = p;
  std::int64_t k = 0;
  // mean < 30 here, so p never underflows and the loop stays short
  while (u > cum && k < 1000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cum += p;
  }
  return k;
}

// Hormann's PTRS transformed rejection, valid for mean >= 10.
std::int64_t poisson_ptrs(std::mt19937_64& rng, double mean) {
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    double u = uniform01(rng) - 0.5;
    double v = uniform01(rng);
    double us = 0.5 - std::abs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    double k = kf;
    double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    double rhs = k * log_mean - mean - std::lgamma(k + 1.0);
    if (lhs <= rhs) return static_cast<std::int64_t>(kf);
  }
}

} // namespace

std::int64_t poisson(std::mt19937_64& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("poisson: mean must be finite and non-negative");
  }
  if (mean == 0.0) return 0;
  if (mean < 30.0) return poisson_inversion(rng, mean);
  return poisson_ptrs(rng, mean);
}

} // namespace entangle
