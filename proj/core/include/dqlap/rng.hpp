#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace dqlap {

// All randomness flows from seeded mt19937_64 engines. The distribution
// helpers below are hand-rolled because std::uniform_*_distribution and
// std::normal_distribution are not pinned by the standard, and the same seed
// must reproduce the same run on every platform.

inline double uniform_double(std::mt19937_64& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  // Modulo draw; bias is negligible for the index ranges used here.
  return static_cast<std::size_t>(rng() % n);
}

inline double gaussian(std::mt19937_64& rng, double mean = 0.0,
                       double stddev = 1.0) {
  // Box-Muller, cosine half only, so the draw count per sample is fixed.
  const double u1 = 1.0 - uniform_double(rng);  // (0, 1]
  const double u2 = uniform_double(rng);
  const double mag = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * mag * std::cos(2.0 * std::numbers::pi * u2);
}

// Fisher-Yates with modulo draws.
template <typename T>
void seeded_shuffle(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[uniform_index(rng, i)]);
  }
}

// splitmix64 finalizer; combines a base seed with a salt (e.g. a day index)
// into an independent stream seed.
inline std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dqlap
