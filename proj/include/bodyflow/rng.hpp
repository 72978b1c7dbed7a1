#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace bodyflow {

/// Stateless counter-based generator: value(i) depends only on (seed, i), so
/// any partition of the counter range reproduces the sequential stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const {
    // splitmix64 finalizer over a seed-keyed counter
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform on [0, 1).
  double uniform(std::uint64_t counter) const { return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t seed_;
};

/// Uniform on [0, 1) from a 64-bit engine, with a fixed bit recipe so streams
/// match across standard library implementations.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
inline double standard_normal(std::mt19937_64& rng) {
  // Box-Muller; keeps the stream independent of <random> distribution internals.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace bodyflow
