#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pfr {

// Deterministic samplers on top of std::mt19937_64. The standard
// distributions are implementation-defined, so anything whose output is
// frozen into tests or reports draws through these instead.

inline double unit_uniform(std::mt19937_64 &rng) {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double unit_normal(std::mt19937_64 &rng) {
  // Box-Muller; one variate per call keeps the draw count predictable
  double u1 = unit_uniform(rng);
  double u2 = unit_uniform(rng);
  while (u1 <= 0.0) u1 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(std::mt19937_64 &rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

// splitmix64 finalizer; decorrelates streams that share a base seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace pfr
