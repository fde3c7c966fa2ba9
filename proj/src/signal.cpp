#include "bbq/signal.hpp"

#include "bbq/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace bbq {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

bool valid_rho(double rho) { return std::isfinite(rho) && std::fabs(rho) < 1.0; }
bool valid_sigma(double sigma) { return std::isfinite(sigma) && sigma > 0.0; }

}  // namespace

void Ar1Config::validate() const {
  require(valid_rho(rho), "Ar1Config: rho must satisfy |rho| < 1");
  require(valid_sigma(sigma), "Ar1Config: sigma must be positive");
  require(length > 0, "Ar1Config: length must be positive");
}

void FrameSequenceConfig::validate() const {
  require(frame_count > 0, "FrameSequenceConfig: frame_count must be positive");
  require(pixels_per_frame > 0, "FrameSequenceConfig: pixels_per_frame must be positive");
  require(valid_rho(spatial_rho), "FrameSequenceConfig: spatial_rho must satisfy |rho| < 1");
  require(valid_sigma(temporal_innovation_sigma),
          "FrameSequenceConfig: temporal_innovation_sigma must be positive");
  require(valid_sigma(base_sigma), "FrameSequenceConfig: base_sigma must be positive");
}

std::vector<double> gen_ar1(const Ar1Config& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const double innovation = cfg.sigma * std::sqrt(1.0 - cfg.rho * cfg.rho);
  std::vector<double> x(cfg.length);
  x[0] = cfg.sigma * rng.gaussian();
  for (std::size_t l = 1; l < x.size(); ++l) x[l] = cfg.rho * x[l - 1] + innovation * rng.gaussian();
  return x;
}

std::vector<std::vector<double>> blocks(std::span<const double> x, std::size_t block_len) {
  if (block_len == 0) throw std::invalid_argument("blocks: block_len must be positive");
  std::vector<std::vector<double>> out;
  out.reserve(x.size() / block_len);
  for (std::size_t start = 0; start + block_len <= x.size(); start += block_len) {
    out.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(start),
                     x.begin() + static_cast<std::ptrdiff_t>(start + block_len));
  }
  return out;
}

Frames gen_frame_sequence(const FrameSequenceConfig& cfg) {
  cfg.validate();
  Frames frames;
  frames.reserve(cfg.frame_count);
  frames.push_back(gen_ar1({cfg.spatial_rho, cfg.base_sigma, cfg.pixels_per_frame, derive_seed(cfg.seed, 0)}));
  for (std::size_t t = 1; t < cfg.frame_count; ++t) {
    const auto innovation = gen_ar1(
        {cfg.spatial_rho, cfg.temporal_innovation_sigma, cfg.pixels_per_frame, derive_seed(cfg.seed, t)});
    std::vector<double> frame = frames.back();
    for (std::size_t i = 0; i < frame.size(); ++i) frame[i] += innovation[i];
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace bbq
