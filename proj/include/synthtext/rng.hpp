#pragma once

#include <cstdint>
#include <random>

namespace synthtext {

/// SplitMix64 finalizer; used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based seed for the scene at `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Seeded generator with distribution helpers whose output does not depend on
/// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);

  bool bernoulli(double p) { return uniform() < p; }

  /// Child generator for an independent sub-stream.
  Rng fork() { return Rng(mix64(next_u64())); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace synthtext
