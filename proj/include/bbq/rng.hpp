#pragma once

#include <cstdint>
#include <random>

namespace bbq {

/// SplitMix64 finalizer; used to decorrelate user seeds and derive per-stream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seed for independent stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded random source: MT19937-64 engine with a Box-Muller Gaussian
/// conversion. Output is bit-identical for a given seed within this
/// implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the basic (trigonometric) Box-Muller transform;
  /// the second value of each pair is cached.
  double gaussian();
  /// Uniform integer on [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bbq
