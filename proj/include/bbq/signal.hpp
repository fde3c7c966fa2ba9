#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bbq {

/// Stationary zero-mean Gaussian AR(1) source.
struct Ar1Config {
  double rho = 0.0;      // lag-1 correlation, |rho| < 1
  double sigma = 1.0;    // marginal standard deviation
  std::size_t length = 0;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Frames for predictive-coding experiments: frame 0 is a spatial AR(1)
/// field, each later frame adds an independent spatial AR(1) innovation.
struct FrameSequenceConfig {
  std::size_t frame_count = 1;
  std::size_t pixels_per_frame = 16;
  double spatial_rho = 0.0;
  double temporal_innovation_sigma = 1.0;
  double base_sigma = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

using Frames = std::vector<std::vector<double>>;

/// x[0] ~ N(0, sigma^2) from the stationary marginal, then
/// x[l] = rho x[l-1] + sigma sqrt(1 - rho^2) e[l]. No burn-in is needed.
std::vector<double> gen_ar1(const Ar1Config& cfg);

/// Disjoint consecutive segments of length block_len; a trailing remainder
/// is dropped. Throws for block_len == 0.
std::vector<std::vector<double>> blocks(std::span<const double> x, std::size_t block_len);

Frames gen_frame_sequence(const FrameSequenceConfig& cfg);

}  // namespace bbq
