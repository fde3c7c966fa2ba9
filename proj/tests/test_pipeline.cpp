#include "bbq/pipeline.hpp"
#include "bbq/rng.hpp"
#include "bbq/signal.hpp"
#include "bbq/theory.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace bbq;

namespace {

bool on_lattice(const std::vector<double>& v, double q) {
  for (double x : v) {
    if (std::fabs(x / q - std::round(x / q)) > 1e-9) return false;
  }
  return true;
}

Frames random_frames(std::uint64_t seed, std::size_t count, std::size_t len, double innovation = 2.0) {
  FrameSequenceConfig fc;
  fc.frame_count = count;
  fc.pixels_per_frame = len;
  fc.spatial_rho = 0.85;
  fc.base_sigma = 40.0;
  fc.temporal_innovation_sigma = innovation;
  fc.seed = seed;
  return gen_frame_sequence(fc);
}

double mean_square(const Frames& f) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& v : f)
    for (double x : v) {
      s += x * x;
      ++n;
    }
  return s / static_cast<double>(n);
}

}  // namespace

TEST_CASE("PipelineConfig") {
  const PipelineConfig cfg(0.5, 2.0, make_dct(4));
  CHECK(cfg.alpha() == 4.0);
  CHECK(cfg.block_len() == 4);
  CHECK_THROWS_AS(PipelineConfig(2.0, 1.0, make_dct(4)), std::invalid_argument);
  CHECK_THROWS_AS(PipelineConfig(0.0, 1.0, make_dct(4)), std::invalid_argument);
}

TEST_CASE("main branch: zero input and lattice fixed points") {
  const PipelineConfig cfg(0.2, 0.8, make_dct(8));
  const auto z = code_main_branch(std::vector<double>(8, 0.0), cfg);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(z.indices[k] == 0);
    CHECK(z.reconstruction[k] == 0.0);
  }
  const PipelineConfig one(0.25, 0.25, make_dct(1));
  for (int k = -10; k <= 10; ++k) {
    const std::vector<double> r = {0.25 * k};
    CHECK(code_main_branch(r, one).reconstruction[0] == r[0]);
  }
  CHECK_THROWS_AS(code_main_branch(std::vector<double>(7), cfg), std::invalid_argument);
}

TEST_CASE("main branch agrees with the centroid for lattice inputs") {
  const auto rot = make_rotation_2x2();
  Rng rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const double q1 = 0.1 + rng.uniform();
    const double q2 = q1 * (1.0 + 7.0 * rng.uniform());
    const std::vector<std::int64_t> p = {rng.uniform_int(-50, 50), rng.uniform_int(-50, 50)};
    const std::vector<double> r = {q1 * static_cast<double>(p[0]), q1 * static_cast<double>(p[1])};
    const auto coded = code_main_branch(r, PipelineConfig(q1, q2, rot));
    const auto expect = reconstruction_centroid(p, q1, q2, rot);
    CHECK(std::fabs(coded.reconstruction[0] - expect[0]) <= 1e-9);
    CHECK(std::fabs(coded.reconstruction[1] - expect[1]) <= 1e-9);
  }
}

TEST_CASE("property: main-branch output is on the q1 lattice") {
  Rng rng(4);
  const auto t = make_dct(16);
  for (int trial = 0; trial < 500; ++trial) {
    const double q1 = 0.01 + rng.uniform();
    const PipelineConfig cfg(q1, q1 * (1.0 + 5.0 * rng.uniform()), t);
    std::vector<double> r(16);
    for (double& x : r) x = 10.0 * rng.gaussian();
    CHECK(on_lattice(code_main_branch(r, cfg).reconstruction, q1));
  }
}

TEST_CASE("predictor") {
  const std::vector<double> prev = {0.4, 1.5, -2.6};
  CHECK(PreviousFramePredictor{}.predict(prev) == std::vector<double>{0.0, 2.0, -3.0});
  CHECK(PreviousFramePredictor{0.0}.predict(prev) == prev);
  CHECK_THROWS_AS(PreviousFramePredictor{-1.0}.predict(prev), std::invalid_argument);
}

TEST_CASE("predictive loop: single frame equals the main branch") {
  const PipelineConfig cfg(0.3, 1.1, make_dct(16));
  const auto frames = random_frames(1, 1, 16);
  const auto recon = code_predictive(frames, cfg);
  CHECK(recon[0] == code_main_branch(frames[0], cfg).reconstruction);
  const auto err = code_equivalent(frames, cfg);
  for (std::size_t i = 0; i < 16; ++i) CHECK(err[0][i] == doctest::Approx(recon[0][i] - frames[0][i]));
}

TEST_CASE("predictive loop: constant frames stay bounded") {
  const double q = 0.9;
  const PipelineConfig cfg(q, q, make_dct(16));
  Frames frames(6, std::vector<double>(16));
  Rng rng(3);
  for (double& x : frames[0]) x = 20.0 * rng.gaussian();
  for (auto& f : frames) f = frames[0];
  const auto recon = code_predictive(frames, cfg);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    double mse = 0.0;
    for (std::size_t i = 0; i < 16; ++i) mse += (recon[t][i] - frames[t][i]) * (recon[t][i] - frames[t][i]);
    mse /= 16.0;
    CHECK(mse <= 16.0 * q * q / 4.0);
  }
}

TEST_CASE("property: direct and residue-domain loops give the same errors") {
  Rng rng(8);
  for (const double grid : {1.0, 0.0, 0.37}) {
    const PreviousFramePredictor pred{grid};
    for (int trial = 0; trial < 40; ++trial) {
      const double q1 = 0.05 + 0.9 * rng.uniform();
      const PipelineConfig cfg(q1, q1 * (1.0 + 7.0 * rng.uniform()), make_dct(16));
      const auto frames = random_frames(static_cast<std::uint64_t>(trial), 10, 16);
      const auto recon = code_predictive(frames, cfg, pred);
      const auto err = code_equivalent(frames, cfg, pred);
      for (std::size_t t = 0; t < frames.size(); ++t) {
        CHECK(on_lattice(recon[t], q1));
        for (std::size_t i = 0; i < 16; ++i) CHECK(std::fabs(recon[t][i] - frames[t][i] - err[t][i]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("lattice-aligned prediction: dropping the offset changes nothing") {
  const double q1 = 0.25;
  const PipelineConfig cfg(q1, 1.0, make_dct(8));
  const PreviousFramePredictor pred{q1};
  const auto frames = random_frames(12, 8, 32);
  const auto a = code_equivalent(frames, cfg, pred);
  const auto b = code_residue_nonpredictive(frames, cfg, pred);
  for (std::size_t t = 0; t < frames.size(); ++t)
    for (std::size_t i = 0; i < frames[t].size(); ++i) CHECK(std::fabs(a[t][i] - b[t][i]) <= 1e-12);
}

TEST_CASE("dropping the offset is a small perturbation when q1 is fine") {
  const auto frames = random_frames(99, 20, 1600, 4.0);
  const double q1 = 0.2137;  // about 1/20 of the residue spread, off the integer grid
  const PipelineConfig cfg(q1, 4.0 * q1, make_dct(16));
  const double exact = mean_square(code_equivalent(frames, cfg));
  const double approx = mean_square(code_residue_nonpredictive(frames, cfg));
  CHECK(approx == doctest::Approx(exact).epsilon(0.05));
}

TEST_CASE("zero frames give zero error") {
  const Frames zeros(4, std::vector<double>(16, 0.0));
  const PipelineConfig cfg(0.3, 0.9, make_dct(16));
  for (const auto& f : code_residue_nonpredictive(zeros, cfg))
    for (double e : f) CHECK(e == 0.0);
  for (const auto& f : code_predictive(zeros, cfg))
    for (double e : f) CHECK(e == 0.0);
}

TEST_CASE("frame shape checks") {
  const PipelineConfig cfg(0.3, 0.9, make_dct(16));
  CHECK_THROWS_AS(code_predictive(Frames{}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(code_equivalent(Frames{std::vector<double>(15)}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(code_residue_nonpredictive(Frames{std::vector<double>(16), std::vector<double>(32)}, cfg),
                  std::invalid_argument);
  CHECK(code_predictive(Frames{std::vector<double>(48, 1.0)}, cfg)[0].size() == 48);
}

TEST_CASE("estimate_bitrate") {
  std::vector<CodedBlock> same(3, CodedBlock{{5, 5, 5, 5}, {}});
  CHECK(estimate_bitrate(same) == 0.0);
  std::vector<CodedBlock> coin = {CodedBlock{{0, 1, 0, 1}, {}}, CodedBlock{{1, 0, 1, 0}, {}}};
  CHECK(estimate_bitrate(coin) == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_bitrate(std::vector<CodedBlock>{}), std::invalid_argument);

  IndexHistogram a, b;
  const std::vector<std::int64_t> x = {0, 1, 2, 3};
  a.add(x);
  b.add(x);
  a.merge(b);
  CHECK(a.total() == 8);
  CHECK(a.distinct() == 4);
  CHECK(a.entropy_bits() == doctest::Approx(2.0));
  CHECK_THROWS_AS(IndexHistogram{}.entropy_bits(), std::invalid_argument);
}

TEST_CASE("rate is set by the codec step") {
  const double sigma = 1.0 / std::sqrt(1.0 - 0.16);
  const auto signal = gen_ar1({0.4, sigma, 16 * 50000, 21});
  const double q2 = sigma / 4.0;
  const auto t = make_dct(16);
  const double ref = measure_rd_point(signal, PipelineConfig(q2 / 8.0, q2, t)).bits_per_sample;
  for (double div : {4.0, 2.0, 1.0}) {
    CAPTURE(div);
    CHECK(measure_rd_point(signal, PipelineConfig(q2 / div, q2, t)).bits_per_sample ==
          doctest::Approx(ref).epsilon(0.02));
  }
}

TEST_CASE("measure_rd_point") {
  const auto signal = gen_ar1({0.4, 1.0, 16 * 20000 + 5, 3});
  const PipelineConfig cfg(0.02, 0.2, make_dct(16));
  const auto p = measure_rd_point(signal, cfg);
  CHECK(p.blocks == 20000);
  CHECK(p.q1 == 0.02);
  CHECK(p.q2 == 0.2);
  double power = 0.0;
  for (std::size_t i = 0; i < 16 * 20000; ++i) power += signal[i] * signal[i];
  power /= 16.0 * 20000.0;
  CHECK(p.snr_db == doctest::Approx(10.0 * std::log10(power / p.mse)).epsilon(1e-12));
  CHECK(p.mse == doctest::Approx((0.04 + 0.0004 + 0.0004) / 12.0).epsilon(0.03));

  SweepOptions many;
  many.workers = 3;
  const auto q = measure_rd_point(signal, cfg, many);
  CHECK(q.mse == p.mse);
  CHECK(q.bits_per_sample == p.bits_per_sample);
  CHECK_THROWS_AS(measure_rd_point(std::vector<double>(15), cfg), std::invalid_argument);
}

TEST_CASE("rd_sweep: ordering, modes and the negligible-q1 reference") {
  const double sigma = 1.0 / std::sqrt(1.0 - 0.16);
  const Ar1Config src{0.4, sigma, 16 * 50000, 5};
  const auto t = make_dct(16);
  const double q1 = sigma / 10.0;
  const std::vector<double> q2s = {8 * q1, 4 * q1, 2 * q1, q1};
  const auto neg = rd_sweep(src, t, q1, q2s, ReferenceMode::negligible_q1);
  const auto coarse = rd_sweep(src, t, q1, q2s, ReferenceMode::coarse_q1);
  REQUIRE(neg.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(neg[i].q2 == q2s[i]);
    CHECK(neg[i].q1 == doctest::Approx(q2s[i] * kNegligibleStepScale));
    CHECK(coarse[i].q1 == q1);
  }
  // High-rate points: SNR against the uniform-noise prediction q2^2/12.
  const auto signal = gen_ar1(src);
  double power = 0.0;
  for (double x : signal) power += x * x;
  power /= static_cast<double>(signal.size());
  for (std::size_t i = 1; i < 4; ++i) {
    CAPTURE(i);
    CHECK(std::fabs(neg[i].snr_db - 10.0 * std::log10(power / (q2s[i] * q2s[i] / 12.0))) <= 0.05);
  }
  const auto gaps = snr_gaps(neg, coarse);
  for (double g : gaps) CHECK(g > 0.0);
  CHECK_THROWS_AS(rd_sweep(src, t, 2.0 * q1, q2s, ReferenceMode::coarse_q1), std::invalid_argument);
  CHECK_THROWS_AS(snr_gaps(neg, std::vector<RDPoint>(coarse.begin(), coarse.begin() + 2)),
                  std::invalid_argument);
}
