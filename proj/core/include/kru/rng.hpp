#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace kru {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stream identifiers so that independent consumers of one run seed never overlap.
enum class Stream : std::uint64_t {
  init = 1,
  train_data = 2,
  valid_data = 3,
  test_data = 4,
  permutation = 5,
  shuffle = 6,
  probe = 7,
};

/// Seedable generator: mt19937_64 keyed by mix64(seed, stream, index).
///
/// Every (seed, stream, index) triple names an independent, reproducible sequence,
/// so generators can be rebuilt from counters alone (this is the checkpointed RNG state).
/// Conversions to double and normals are written out explicitly rather than going
/// through <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, Stream stream = Stream::init, std::uint64_t index = 0)
      : engine_(mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(stream))) + index)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n > 0. Rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace kru
