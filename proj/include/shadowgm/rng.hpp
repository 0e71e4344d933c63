#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace shadowgm::rng {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

/// Uniform in the open interval (0, 1) from the top 53 bits of a word.
constexpr double to_unit(std::uint64_t word) {
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal drawn from the counter-based stream (seed, stream, counter).
/// Identical inputs give identical outputs regardless of call order.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t k = key(seed, stream, counter);
  const double u1 = to_unit(k);
  const double u2 = to_unit(mix64(k));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Seed of ensemble member `index`; injective in `index` for a fixed base.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return mix64(base_seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

inline constexpr std::uint64_t kIncrementStream = 0x1;
inline constexpr std::uint64_t kBridgeStream = 0x2;

}  // namespace shadowgm::rng
