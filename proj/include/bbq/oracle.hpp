#pragma once

// Brute-force reference computations used to check the closed forms in
// theory.hpp: dense midpoint-rule integration over a hypercube, exhaustive
// enumeration of baseband cells, and Monte Carlo pipeline distortion.

#include "bbq/pipeline.hpp"
#include "bbq/signal.hpp"
#include "bbq/transform.hpp"

#include <cstddef>
#include <functional>
#include <span>

namespace bbq::oracle {

/// Midpoint grid over the integration cell [-a, a]^N.
struct GridSpec {
  std::size_t resolution = 256;  // samples per axis, >= 16

  void validate() const;
};

/// Average of |x - centroid|^2 over the midpoint grid of [-a, a]^N, N in 1..3.
double hypercube_mse_numeric(std::size_t n_dim, double half_edge, std::span<const double> centroid,
                             GridSpec grid = {});

/// Uniform average of |m - m_hat|^2 over every lattice index p in
/// {-M..M}^N, with m = q1 p and m_hat from reconstruction_centroid.
double expected_d2_bruteforce(double q1, double q2, const OrthogonalTransform& t, std::size_t m_range);

/// Per-coordinate CDF of the source; cells are weighted by the product of
/// per-coordinate cell probabilities.
using MarginalCdf = std::function<double(double)>;

/// Probability-weighted variant of expected_d2_bruteforce for independent
/// coordinates with the given marginal. For sensitivity studies only.
double expected_d2_weighted(double q1, double q2, const OrthogonalTransform& t, std::size_t m_range,
                            const MarginalCdf& cdf);

inline constexpr std::size_t kMinMonteCarloBlocks = 10000;

/// Pooled per-sample MSE of `blocks` (>= kMinMonteCarloBlocks) AR(1) blocks through the main branch.
double pipeline_mc_distortion(const PipelineConfig& cfg, const Ar1Config& source, std::size_t blocks);

/// Same for a caller-provided signal (every complete block is coded).
double pipeline_mc_distortion(const PipelineConfig& cfg, std::span<const double> signal);

}  // namespace bbq::oracle
