#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace dpminimax {

/// Seeded random stream. All variates are produced from the engine's raw
/// 64-bit output by explicit transforms (inverse CDF, Box-Muller), so a
/// seed yields the same sample path on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream keyed by (seed, keys...). Used for per-trial streams
  /// so results do not depend on thread scheduling.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal();

  /// Laplace(0, scale) by inverse CDF.
  double laplace(double scale);

  /// Index i with probability cdf[i] - cdf[i-1]; `cdf` is nondecreasing and
  /// ends at (approximately) 1.
  std::size_t categorical(std::span<const double> cdf);

  std::size_t below(std::size_t bound) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(bound)) % bound;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dpminimax
