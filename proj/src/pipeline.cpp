#include "bbq/pipeline.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bbq {

namespace {

constexpr std::size_t kSweepChunkBlocks = 512;

// Returns the common frame length, a positive multiple of the block length.
std::size_t check_frames(const Frames& frames, const PipelineConfig& cfg, const char* who) {
  if (frames.empty()) throw std::invalid_argument(std::string(who) + ": empty frame list");
  const std::size_t m = frames.front().size();
  const std::size_t n = cfg.block_len();
  if (m == 0 || m % n != 0) {
    throw std::invalid_argument(std::string(who) + ": frame length " + std::to_string(m) +
                                " is not a multiple of block length " + std::to_string(n));
  }
  for (const auto& f : frames) {
    if (f.size() != m) throw std::invalid_argument(std::string(who) + ": frames differ in length");
  }
  return m;
}

// b = T^-1 iQ2(Q2(T a)), block by block along the frame.
void transform_code(const PipelineConfig& cfg, std::span<const double> a, std::span<double> b) {
  const std::size_t n = cfg.block_len();
  std::vector<double> c(n);
  for (std::size_t off = 0; off < a.size(); off += n) {
    cfg.transform().apply(a.subspan(off, n), c);
    for (double& v : c) v = cfg.codec().reconstruct(v);
    cfg.transform().apply_inverse(c, b.subspan(off, n));
  }
}

std::vector<double> predict_or_zero(const PreviousFramePredictor& predictor, const std::vector<double>* previous,
                                    std::size_t n) {
  if (previous == nullptr) return std::vector<double>(n, 0.0);
  return predictor.predict(*previous);
}

}  // namespace

PipelineConfig::PipelineConfig(double q1, double q2, OrthogonalTransform transform)
    : baseband_(q1), codec_(q2), transform_(std::move(transform)) {
  if (q1 > q2) {
    throw std::invalid_argument("PipelineConfig: baseband step q1 must not exceed codec step q2");
  }
}

MainBranchCoder::MainBranchCoder(const PipelineConfig& cfg)
    : cfg_(cfg), work_(cfg.block_len()), coeffs_(cfg.block_len()) {}

void MainBranchCoder::code(std::span<const double> r, std::span<std::int64_t> indices,
                           std::span<double> reconstruction) {
  const std::size_t n = cfg_.block_len();
  if (r.size() != n || indices.size() != n || reconstruction.size() != n) {
    throw std::invalid_argument("MainBranchCoder: block length " + std::to_string(r.size()) +
                                " does not match transform size " + std::to_string(n));
  }
  cfg_.baseband().reconstruct(r, work_);
  cfg_.transform().apply(work_, coeffs_);
  cfg_.codec().index(coeffs_, indices);
  for (std::size_t k = 0; k < n; ++k) coeffs_[k] = cfg_.codec().dequantize(indices[k]);
  cfg_.transform().apply_inverse(coeffs_, work_);
  cfg_.baseband().reconstruct(work_, reconstruction);
}

CodedBlock code_main_branch(std::span<const double> r, const PipelineConfig& cfg) {
  CodedBlock out{std::vector<std::int64_t>(cfg.block_len()), std::vector<double>(cfg.block_len())};
  MainBranchCoder(cfg).code(r, out.indices, out.reconstruction);
  return out;
}

std::vector<double> PreviousFramePredictor::predict(std::span<const double> previous) const {
  std::vector<double> j(previous.begin(), previous.end());
  if (sample_grid > 0.0) {
    const ScalarQuantizer grid(sample_grid);
    grid.reconstruct(j, j);
  } else if (sample_grid < 0.0 || !std::isfinite(sample_grid)) {
    throw std::invalid_argument("PreviousFramePredictor: sample_grid must be >= 0");
  }
  return j;
}

Frames code_predictive(const Frames& frames, const PipelineConfig& cfg, const PreviousFramePredictor& predictor) {
  const std::size_t n = check_frames(frames, cfg, "code_predictive");
  const auto& q1 = cfg.baseband();
  Frames recon;
  recon.reserve(frames.size());
  std::vector<double> a(n), b(n);
  for (const auto& frame : frames) {
    const auto j = predict_or_zero(predictor, recon.empty() ? nullptr : &recon.back(), n);
    for (std::size_t k = 0; k < n; ++k) a[k] = q1.reconstruct(frame[k]) - j[k];
    transform_code(cfg, a, b);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = q1.reconstruct(b[k] + j[k]);
    recon.push_back(std::move(out));
  }
  return recon;
}

Frames code_equivalent(const Frames& frames, const PipelineConfig& cfg, const PreviousFramePredictor& predictor) {
  const std::size_t n = check_frames(frames, cfg, "code_equivalent");
  const auto& q1 = cfg.baseband();
  Frames errors;
  errors.reserve(frames.size());
  std::vector<double> previous;
  std::vector<double> lattice_part(n), remainder(n), residue(n), a(n), b(n);
  for (const auto& frame : frames) {
    const auto j = predict_or_zero(predictor, errors.empty() ? nullptr : &previous, n);
    for (std::size_t k = 0; k < n; ++k) {
      lattice_part[k] = q1.reconstruct(j[k]);
      remainder[k] = j[k] - lattice_part[k];  // J % q1
      residue[k] = frame[k] - lattice_part[k];
      a[k] = q1.reconstruct(residue[k]) - remainder[k];
    }
    transform_code(cfg, a, b);
    std::vector<double> err(n);
    previous.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      err[k] = q1.reconstruct(b[k] + remainder[k]) - residue[k];
      previous[k] = frame[k] + err[k];
    }
    errors.push_back(std::move(err));
  }
  return errors;
}

Frames code_residue_nonpredictive(const Frames& frames, const PipelineConfig& cfg,
                                  const PreviousFramePredictor& predictor) {
  const std::size_t n = check_frames(frames, cfg, "code_residue_nonpredictive");
  const std::size_t block = cfg.block_len();
  const auto& q1 = cfg.baseband();
  MainBranchCoder coder(cfg);
  Frames errors;
  errors.reserve(frames.size());
  std::vector<double> previous, residue(n), recon(n);
  std::vector<std::int64_t> indices(block);
  for (const auto& frame : frames) {
    const auto j = predict_or_zero(predictor, errors.empty() ? nullptr : &previous, n);
    for (std::size_t k = 0; k < n; ++k) residue[k] = frame[k] - q1.reconstruct(j[k]);
    for (std::size_t off = 0; off < n; off += block) {
      coder.code(std::span<const double>(residue).subspan(off, block), indices,
                 std::span<double>(recon).subspan(off, block));
    }
    std::vector<double> err(n);
    previous.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      err[k] = recon[k] - residue[k];
      previous[k] = frame[k] + err[k];
    }
    errors.push_back(std::move(err));
  }
  return errors;
}

void IndexHistogram::add(std::span<const std::int64_t> indices) {
  for (auto k : indices) ++counts_[k];
  total_ += indices.size();
}

void IndexHistogram::merge(const IndexHistogram& other) {
  for (const auto& [k, c] : other.counts_) counts_[k] += c;
  total_ += other.total_;
}

double IndexHistogram::entropy_bits() const {
  if (total_ == 0) throw std::invalid_argument("IndexHistogram: no indices recorded");
  // Sum in key order so the result does not depend on hash-table layout.
  std::vector<std::pair<std::int64_t, std::uint64_t>> sorted(counts_.begin(), counts_.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(total_);
  double h = 0.0;
  for (const auto& [k, c] : sorted) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h == 0.0 ? 0.0 : h;  // avoid -0
}

double estimate_bitrate(std::span<const CodedBlock> coded) {
  if (coded.empty()) throw std::invalid_argument("estimate_bitrate: no coded blocks");
  IndexHistogram hist;
  for (const auto& block : coded) hist.add(block.indices);
  return hist.entropy_bits();
}

RDPoint measure_rd_point(std::span<const double> signal, const PipelineConfig& cfg, SweepOptions options) {
  const std::size_t n = cfg.block_len();
  const std::size_t block_count = signal.size() / n;
  if (block_count == 0) throw std::invalid_argument("measure_rd_point: signal shorter than one block");

  const std::size_t chunks = (block_count + kSweepChunkBlocks - 1) / kSweepChunkBlocks;
  std::vector<double> chunk_sq_error(chunks, 0.0);
  std::vector<double> chunk_power(chunks, 0.0);
  std::vector<IndexHistogram> chunk_hist(chunks);

  detail::for_each_chunk(chunks, options.workers, [&](std::size_t c) {
    MainBranchCoder coder(cfg);
    std::vector<std::int64_t> indices(n);
    std::vector<double> recon(n);
    double sq_error = 0.0, power = 0.0;
    const std::size_t end = std::min(block_count, (c + 1) * kSweepChunkBlocks);
    for (std::size_t b = c * kSweepChunkBlocks; b < end; ++b) {
      const auto block = signal.subspan(b * n, n);
      coder.code(block, indices, recon);
      for (std::size_t k = 0; k < n; ++k) {
        const double e = recon[k] - block[k];
        sq_error += e * e;
        power += block[k] * block[k];
      }
      chunk_hist[c].add(indices);
    }
    chunk_sq_error[c] = sq_error;
    chunk_power[c] = power;
  });

  double sq_error = 0.0, power = 0.0;
  IndexHistogram hist;
  for (std::size_t c = 0; c < chunks; ++c) {
    sq_error += chunk_sq_error[c];
    power += chunk_power[c];
    hist.merge(chunk_hist[c]);
  }
  const double samples = static_cast<double>(block_count * n);
  RDPoint point;
  point.q1 = cfg.q1();
  point.q2 = cfg.q2();
  point.blocks = block_count;
  point.bits_per_sample = hist.entropy_bits();
  point.mse = sq_error / samples;
  point.snr_db = point.mse > 0.0 ? 10.0 * std::log10(power / samples / point.mse)
                                 : std::numeric_limits<double>::infinity();
  return point;
}

std::vector<RDPoint> rd_sweep(std::span<const double> signal, const OrthogonalTransform& t, double q1,
                              std::span<const double> q2_list, ReferenceMode mode, SweepOptions options) {
  if (q2_list.empty()) throw std::invalid_argument("rd_sweep: empty q2 list");
  if (mode == ReferenceMode::coarse_q1) {
    if (!std::isfinite(q1) || !(q1 > 0.0)) throw std::invalid_argument("rd_sweep: q1 must be positive");
    if (q1 > *std::min_element(q2_list.begin(), q2_list.end())) {
      throw std::invalid_argument("rd_sweep: q1 must not exceed any q2 in coarse mode");
    }
  }
  std::vector<RDPoint> points;
  points.reserve(q2_list.size());
  for (double q2 : q2_list) {
    const double step1 = mode == ReferenceMode::coarse_q1 ? q1 : q2 * kNegligibleStepScale;
    points.push_back(measure_rd_point(signal, PipelineConfig(step1, q2, t), options));
  }
  return points;
}

std::vector<RDPoint> rd_sweep(const Ar1Config& source, const OrthogonalTransform& t, double q1,
                              std::span<const double> q2_list, ReferenceMode mode, SweepOptions options) {
  const auto signal = gen_ar1(source);
  return rd_sweep(signal, t, q1, q2_list, mode, options);
}

std::vector<double> snr_gaps(std::span<const RDPoint> reference, std::span<const RDPoint> test) {
  if (reference.size() != test.size()) throw std::invalid_argument("snr_gaps: sweeps differ in length");
  std::vector<double> gaps;
  gaps.reserve(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (reference[i].q2 != test[i].q2) throw std::invalid_argument("snr_gaps: q2 values do not line up");
    gaps.push_back(reference[i].snr_db - test[i].snr_db);
  }
  return gaps;
}

}  // namespace bbq
