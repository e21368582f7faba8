#pragma once

#include <cstdint>
#include <random>

namespace cpsf {

/// Seedable random stream used by every stochastic operation.
///
/// Distributions are derived directly from the raw mt19937_64 output instead
/// of the <random> distribution adaptors, whose algorithms differ between
/// standard library vendors. Given a seed, the drawn sequence is identical
/// on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [lo, hi], both inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  bool bernoulli(double p) { return uniform01() < p; }

  double normal(double mean, double stddev);

private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; derives independent sub-seeds from a base seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Sub-seed `index` of stream `base`. Independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

} // namespace cpsf
