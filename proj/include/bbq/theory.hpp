#pragma once

// Closed-form distortion and SNR-loss predictions for a chain of a baseband
// quantizer (step q1), an orthogonal transform, a codec quantizer (step q2),
// the inverse transform and a final baseband quantizer, together with the
// Monte Carlo estimator of the coupling statistics gamma1 and gamma12 that
// the coarse-baseband regime (q2/2 < q1 <= q2) depends on.

#include "bbq/transform.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bbq {

/// MSE of a point uniform on an n-dimensional hypercube of edge 2a when it
/// is reconstructed at a centroid at distance d from the cube's center:
/// d^2 + (n/3) a^2.
double hypercube_mse(std::size_t n_dim, double half_edge, double centroid_distance);

/// gamma1 = (12/N) E[|W|^2], gamma12 = (12/N) E[Y^T T W]. In the fine regime
/// (q1 <= q2/2) these take the values 1 and 0.
struct CouplingStats {
  double gamma1 = 1.0;
  double gamma12 = 0.0;
};

struct GammaEstimate {
  double alpha = 1.0;  // q2 / q1
  double gamma1 = 0.0;
  double gamma12 = 0.0;
  std::size_t samples = 0;
  double se_gamma1 = 0.0;
  double se_gamma12 = 0.0;
  // Share of first-stage arguments (q1/q2) v_n^T p that were exact integers.
  double degenerate_fraction = 0.0;
  // Set when degenerate_fraction exceeded kDegenerateLimit and the estimate
  // was recomputed with q1/q2 scaled by (1 + kRatioJitter).
  bool jittered = false;
  std::string warning;

  static constexpr double kDegenerateLimit = 0.01;
  static constexpr double kRatioJitter = 1e-7;

  CouplingStats coupling() const { return {gamma1, gamma12}; }

  /// |gamma1 - 1| <= k se_gamma1 and |gamma12| <= k se_gamma12.
  bool consistent_with_fine_regime(double k = 3.0) const;
};

struct GammaOptions {
  std::size_t m_range = 1000;     // p drawn uniformly from {-M..M}^N
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;           // 0 = hardware concurrency
};

/// Monte Carlo estimate of gamma1/gamma12 for the given transform and step
/// ratio alpha = q2/q1 >= 1. Samples are split into fixed-size chunks with
/// seeds derived from (seed, chunk), so the result does not depend on the
/// worker count.
GammaEstimate estimate_gammas(const OrthogonalTransform& t, double alpha, const GammaOptions& options = {});

/// Per-alpha memo of estimate_gammas for one transform. Thread-safe.
class GammaCache {
 public:
  GammaCache(OrthogonalTransform t, GammaOptions options);

  const GammaEstimate& get(double alpha);
  const OrthogonalTransform& transform() const noexcept { return transform_; }

 private:
  OrthogonalTransform transform_;
  GammaOptions options_;
  std::map<double, GammaEstimate> cache_;
  std::mutex mutex_;
};

/// Reconstruction point of the baseband cell with lattice index p:
/// q1 round[(q2/q1) T^-1 round((q1/q2) T p)].
std::vector<double> reconstruction_centroid(std::span<const std::int64_t> p, double q1, double q2,
                                            const OrthogonalTransform& t);

/// Residue-function form of the same centroid:
/// m_hat = q1 p + q2 T^-1 Y + q1 W with Y_n = g((q1/q2) v_n^T p) and
/// W_n = g((q2/q1) u_n^T Y).
struct CentroidDecomposition {
  std::vector<double> centroid;
  std::vector<double> first_residue;   // Y
  std::vector<double> second_residue;  // W
};

CentroidDecomposition decompose_centroid(std::span<const std::int64_t> p, double q1, double q2,
                                         const OrthogonalTransform& t);

enum class Regime { fine, coarse };

/// fine when q1 <= q2/2, coarse when q2/2 < q1 <= q2. Throws outside 0 < q1 <= q2.
Regime regime_for(double q1, double q2);
const char* to_string(Regime r) noexcept;

/// E[d^2] averaged over baseband cells:
///   fine:   N (q2^2 + q1^2) / 12
///   coarse: N (q2^2 + gamma1 q1^2 + 2 gamma12 q2 q1) / 12
/// The coarse regime requires `stats`; the fine regime ignores it.
double expected_d2(double q1, double q2, std::size_t n_dim, std::optional<CouplingStats> stats);

struct DistortionPrediction {
  double q1 = 0.0;
  double q2 = 0.0;
  std::size_t n_dim = 0;
  double d_total = 0.0;  // E[|x - x_hat|^2] per vector
  double e_d2 = 0.0;
  Regime regime = Regime::fine;
};

/// D = E[d^2] + (N/12) q1^2.
DistortionPrediction overall_distortion(double q1, double q2, std::size_t n_dim,
                                        std::optional<CouplingStats> stats);

/// Coarse-regime distortion formula evaluated regardless of where q1 lies;
/// used for continuity checks at q1 = q2/2.
double coarse_regime_distortion(double q1, double q2, std::size_t n_dim, CouplingStats stats);

/// 10 log10(1 + 2/alpha^2).
double snr_loss_fine_regime(double alpha);
/// 10 log10(1 + (1 + gamma1)/alpha^2 + 2 gamma12/alpha).
double snr_loss_coarse_regime(double alpha, CouplingStats stats);

/// SNR loss (dB) of the two-baseband-quantizer chain relative to q1 -> 0.
/// alpha >= 2 uses the fine-regime closed form; 1 <= alpha < 2 requires stats.
double snr_loss_two_baseband(double alpha, std::optional<CouplingStats> stats);
double snr_loss_two_baseband(double alpha, GammaCache& cache);

/// SNR loss (dB) with a single baseband quantizer: 10 log10(1 + 1/alpha^2).
double snr_loss_one_baseband(double alpha);

}  // namespace bbq
