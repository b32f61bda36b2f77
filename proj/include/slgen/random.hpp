#pragma once

// Seeded random source with platform-stable sampling.
//
// std::mt19937_64 is bit-specified by the standard, but the std::*_distribution
// adaptors are not, so the draws used by generation are written out here.
// Outputs are identical on every conforming toolchain that shares a libm.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>

namespace slgen {

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of corpus document `index`: element index+1 of the SplitMix64 stream
// started at base_seed, i.e. splitmix64(base_seed + index * golden_gamma).
constexpr std::uint64_t document_seed(std::uint64_t base_seed,
                                      std::uint64_t index) noexcept {
  return splitmix64(base_seed + index * 0x9E3779B97F4A7C15ULL);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform01(); }

  // Uniform integer in [lo, hi], unbiased (rejection on the tail).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());  // full 64-bit range
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller, one output per call so the stream has no hidden cache.
  double normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    const double u1 = uniform_open0();
    const double u2 = uniform01();
    const double z = std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
  }

  double exponential(double scale) { return -scale * std::log(uniform_open0()); }

  // Gamma(shape = 2, scale): sum of two independent exponentials.
  // Strictly positive except with probability 2^-106.
  double gamma2(double scale) {
    double x;
    do {
      x = exponential(scale) + exponential(scale);
    } while (!(x > 0.0));
    return x;
  }

  // Knuth's multiplication method; fine for the small rates used in configs.
  std::int64_t poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double threshold = std::exp(-lambda);
    std::int64_t k = 0;
    double p = uniform01();
    while (p > threshold) {
      ++k;
      p *= uniform01();
    }
    return k;
  }

  // Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("categorical: zero total weight");
    const double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    // Rounding can leave u == total; fall back to the last positive weight.
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0.0) return i;
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace slgen
