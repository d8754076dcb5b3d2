#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "xga/common.hpp"

namespace xga {

/// Deterministic random source. Every draw in the project flows through this
/// class; normal deviates use Box-Muller instead of std::normal_distribution,
/// whose algorithm is implementation-defined, so identical seeds reproduce
/// bit-identical runs across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of mantissa.
  double uniform();

  /// Standard normal deviate.
  double normal();

  /// Uniform integer in [lo, hi], both inclusive.
  int uniform_int(int lo, int hi);

  Vec normal_vector(Index n);
  Mat normal_matrix(Index rows, Index cols);

  /// `count` distinct indices from {0..population-1}, returned sorted.
  std::vector<int> sample_without_replacement(int population, int count);

  /// Independent substream; the same (seed, tag) always yields the same
  /// stream regardless of what has been drawn from this one.
  Rng fork(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 mixing step, used to derive substream seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace xga
