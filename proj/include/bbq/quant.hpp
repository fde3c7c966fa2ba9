#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bbq {

/// Nearest integer with ties rounded away from zero.
///
/// Throws std::domain_error for non-finite input or when the result does not
/// fit in a signed 64-bit index.
std::int64_t round_half_away(double x);

/// Signed rounding error g(x) = round(x) - x.
///
/// Lies in (-1/2, 1/2] for x > 0 and in [-1/2, 1/2) for x < 0; g(0) = 0.
double residue_g(double x);

/// Uniform mid-tread quantizer with step q: index(x) = round(x / q) and
/// dequantize(k) = q * k.
class ScalarQuantizer {
 public:
  explicit ScalarQuantizer(double step);

  double step() const noexcept { return step_; }

  std::int64_t index(double x) const;
  double dequantize(std::int64_t k) const noexcept { return step_ * static_cast<double>(k); }
  double reconstruct(double x) const { return dequantize(index(x)); }

  /// Symmetric remainder x - reconstruct(x), in [-q/2, q/2].
  double remainder(double x) const { return x - reconstruct(x); }

  // Coordinate-wise forms. `out` must have the size of `in`; aliasing is allowed.
  void index(std::span<const double> in, std::span<std::int64_t> out) const;
  void reconstruct(std::span<const double> in, std::span<double> out) const;
  std::vector<double> reconstruct(std::span<const double> in) const;

 private:
  double step_;
};

std::int64_t quantize_index(double x, const ScalarQuantizer& q);
double dequantize(std::int64_t k, const ScalarQuantizer& q);
double quantize_reconstruct(double x, const ScalarQuantizer& q);

}  // namespace bbq
