#pragma once

#include "bbq/quant.hpp"
#include "bbq/signal.hpp"
#include "bbq/transform.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace bbq {

/// Baseband quantizer Q1 (step q1), transform T and codec quantizer Q2
/// (step q2), with q1 <= q2 and block length equal to the transform size.
class PipelineConfig {
 public:
  PipelineConfig(double q1, double q2, OrthogonalTransform transform);

  double q1() const noexcept { return baseband_.step(); }
  double q2() const noexcept { return codec_.step(); }
  double alpha() const noexcept { return q2() / q1(); }
  const ScalarQuantizer& baseband() const noexcept { return baseband_; }
  const ScalarQuantizer& codec() const noexcept { return codec_; }
  const OrthogonalTransform& transform() const noexcept { return transform_; }
  std::size_t block_len() const noexcept { return transform_.size(); }

 private:
  ScalarQuantizer baseband_;
  ScalarQuantizer codec_;
  OrthogonalTransform transform_;
};

struct CodedBlock {
  std::vector<std::int64_t> indices;   // Q2 output
  std::vector<double> reconstruction;  // on the q1 lattice
};

/// Reusable main-branch coder with its own scratch space; one per thread.
class MainBranchCoder {
 public:
  explicit MainBranchCoder(const PipelineConfig& cfg);

  /// indices = Q2(T Q1(r)), reconstruction = Q1(T^-1 iQ2(indices)).
  void code(std::span<const double> r, std::span<std::int64_t> indices, std::span<double> reconstruction);

 private:
  PipelineConfig cfg_;
  std::vector<double> work_;
  std::vector<double> coeffs_;
};

CodedBlock code_main_branch(std::span<const double> r, const PipelineConfig& cfg);

/// Zero-motion predictor: the previous reconstructed frame rounded to the
/// codec's sample grid (integers by default). sample_grid == 0 passes the
/// reconstruction through unchanged. The first frame is predicted by zeros.
struct PreviousFramePredictor {
  double sample_grid = 1.0;

  std::vector<double> predict(std::span<const double> previous) const;
};

/// Frames must share one length, a multiple of the block length; each frame
/// is coded as consecutive blocks.

/// Closed-loop predictive coding. Returns the reconstructed frames
/// Q1(T^-1 Q2{T[Q1(I_t) - J_t]} + J_t).
Frames code_predictive(const Frames& frames, const PipelineConfig& cfg,
                       const PreviousFramePredictor& predictor = {});

/// Residue-domain form of the same loop. With J%q1 = J - Q1(J) and
/// r_t = I_t - Q1(J_t) it returns, per frame, the error
/// Q1(T^-1 Q2{T[Q1(r_t) - J%q1]} + J%q1) - r_t,
/// which equals the reconstruction error of code_predictive.
Frames code_equivalent(const Frames& frames, const PipelineConfig& cfg,
                       const PreviousFramePredictor& predictor = {});

/// As code_equivalent with the J%q1 terms dropped: per-frame error
/// Q1(T^-1 Q2{T Q1(r_t)}) - r_t, with its own closed prediction loop.
Frames code_residue_nonpredictive(const Frames& frames, const PipelineConfig& cfg,
                                  const PreviousFramePredictor& predictor = {});

/// Pooled histogram of Q2 indices.
class IndexHistogram {
 public:
  void add(std::span<const std::int64_t> indices);
  void merge(const IndexHistogram& other);
  std::uint64_t total() const noexcept { return total_; }
  std::size_t distinct() const noexcept { return counts_.size(); }
  /// Zeroth-order empirical entropy, bits per index.
  double entropy_bits() const;

 private:
  std::unordered_map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Zeroth-order entropy of the pooled index stream, bits per sample.
double estimate_bitrate(std::span<const CodedBlock> coded);

struct RDPoint {
  double q1 = 0.0;
  double q2 = 0.0;
  std::size_t blocks = 0;
  double bits_per_sample = 0.0;
  double mse = 0.0;     // per sample
  double snr_db = 0.0;  // 10 log10(mean square of the raw signal / mse)
};

enum class ReferenceMode { coarse_q1, negligible_q1 };

/// q1 used by the negligible-baseband reference, relative to q2.
inline constexpr double kNegligibleStepScale = 1e-4;
/// Fewer blocks per RD point than this gives SNR noise above ~0.02 dB.
inline constexpr std::size_t kRecommendedBlocks = 50000;

struct SweepOptions {
  unsigned workers = 1;  // 0 = hardware concurrency
};

/// Codes every complete block of `signal` through the main branch.
RDPoint measure_rd_point(std::span<const double> signal, const PipelineConfig& cfg, SweepOptions options = {});

/// One RD point per q2 (in the given order). coarse_q1 uses the given q1,
/// which must not exceed any q2; negligible_q1 uses q2 * kNegligibleStepScale.
std::vector<RDPoint> rd_sweep(std::span<const double> signal, const OrthogonalTransform& t, double q1,
                              std::span<const double> q2_list, ReferenceMode mode, SweepOptions options = {});
std::vector<RDPoint> rd_sweep(const Ar1Config& source, const OrthogonalTransform& t, double q1,
                              std::span<const double> q2_list, ReferenceMode mode, SweepOptions options = {});

/// reference[i].snr_db - test[i].snr_db, after checking the q2 values line up.
std::vector<double> snr_gaps(std::span<const RDPoint> reference, std::span<const RDPoint> test);

}  // namespace bbq
