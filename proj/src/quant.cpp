#include "bbq/quant.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bbq {

namespace {

// 2^63; every double strictly below it in magnitude converts to int64.
constexpr double kIndexLimit = 9223372036854775808.0;

void check_sizes(std::size_t in, std::size_t out) {
  if (in != out) {
    throw std::invalid_argument("quantizer: output size " + std::to_string(out) +
                                " does not match input size " + std::to_string(in));
  }
}

}  // namespace

std::int64_t round_half_away(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("round_half_away: non-finite input");
  }
  // std::round breaks ties away from zero regardless of the FP rounding mode.
  const double r = std::round(x);
  if (!(std::fabs(r) < kIndexLimit)) {
    throw std::domain_error("round_half_away: result overflows a 64-bit index");
  }
  return static_cast<std::int64_t>(r);
}

double residue_g(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("residue_g: non-finite input");
  }
  return std::round(x) - x;
}

ScalarQuantizer::ScalarQuantizer(double step) : step_(step) {
  if (!std::isfinite(step) || !(step > 0.0)) {
    throw std::invalid_argument("ScalarQuantizer: step must be positive and finite");
  }
}

std::int64_t ScalarQuantizer::index(double x) const { return round_half_away(x / step_); }

void ScalarQuantizer::index(std::span<const double> in, std::span<std::int64_t> out) const {
  check_sizes(in.size(), out.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = index(in[i]);
}

void ScalarQuantizer::reconstruct(std::span<const double> in, std::span<double> out) const {
  check_sizes(in.size(), out.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = reconstruct(in[i]);
}

std::vector<double> ScalarQuantizer::reconstruct(std::span<const double> in) const {
  std::vector<double> out(in.size());
  reconstruct(in, out);
  return out;
}

std::int64_t quantize_index(double x, const ScalarQuantizer& q) { return q.index(x); }

double dequantize(std::int64_t k, const ScalarQuantizer& q) { return q.dequantize(k); }

double quantize_reconstruct(double x, const ScalarQuantizer& q) { return q.reconstruct(x); }

}  // namespace bbq
