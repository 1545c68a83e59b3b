#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace superrad {

/// Seeded random stream used by every stochastic operation.
///
/// Streams are derived from a (master seed, index) pair through a SplitMix64
/// mix, so sample i always receives the same stream no matter which thread
/// runs it or in what order. Integer draws use rejection on raw 64-bit words
/// rather than std::uniform_int_distribution, whose output sequence is
/// implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Stream for sub-task `index` of a run seeded with `master_seed`.
  static RandomStream derive(std::uint64_t master_seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace superrad
