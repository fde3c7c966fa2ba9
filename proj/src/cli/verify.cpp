#include "verify.hpp"

#include "bbq/oracle.hpp"
#include "bbq/pipeline.hpp"
#include "bbq/rng.hpp"
#include "bbq/signal.hpp"
#include "bbq/theory.hpp"
#include "bbq/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>

namespace bbq::cli {

namespace {

Check near(std::string name, double value, double reference, double tolerance) {
  const bool ok = std::isfinite(value) && std::fabs(value - reference) <= tolerance;
  return {std::move(name), value, reference, tolerance, ok};
}

// Relative tolerance, reported as the equivalent absolute band.
Check near_rel(std::string name, double value, double reference, double rel) {
  return near(std::move(name), value, reference, rel * std::fabs(reference));
}

Check at_least(std::string name, double value, double floor) {
  return {std::move(name), value, floor, 0.0, std::isfinite(value) && value >= floor};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Midpoint-rule integration against d^2 + (N/3) a^2.
std::vector<Check> hypercube_suite(std::uint64_t) {
  std::vector<Check> out;
  const double inside[3] = {0.3, -0.2, 0.1};
  const double outside[3] = {3.0, 4.0, 1.0};
  for (std::size_t n = 1; n <= 3; ++n) {
    for (double a : {0.25, 0.5, 1.0}) {
      for (int where = 0; where < 3; ++where) {
        std::vector<double> c(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
          if (where == 1) c[k] = inside[k] * a;
          if (where == 2) c[k] = outside[k] * a;
        }
        double d2 = 0.0;
        for (double v : c) d2 += v * v;
        const char* label = where == 0 ? "center" : where == 1 ? "inside" : "outside";
        out.push_back(near("hypercube/n=" + std::to_string(n) + "/a=" + fmt(a) + "/" + label,
                           oracle::hypercube_mse_numeric(n, a, c, {256}), hypercube_mse(n, a, std::sqrt(d2)),
                           1e-3));
      }
    }
  }
  const std::vector<double> c = {0.3, -0.2};
  const double exact = hypercube_mse(2, 1.0, std::sqrt(0.13));
  const double e16 = std::fabs(oracle::hypercube_mse_numeric(2, 1.0, c, {16}) - exact);
  const double e64 = std::fabs(oracle::hypercube_mse_numeric(2, 1.0, c, {64}) - exact);
  out.push_back(at_least("hypercube/convergence-order", std::log(e16 / e64) / std::log(4.0), 1.0));
  return out;
}

// Direct predictive loop against the residue-domain form, plus the effect of
// dropping the prediction offset.
std::vector<Check> prediction_suite(std::uint64_t seed) {
  std::vector<Check> out;
  const auto t = make_dct(16);
  double worst = 0.0;
  Rng pick(derive_seed(seed, 0x9e3));
  for (std::uint64_t s = 0; s < 100; ++s) {
    FrameSequenceConfig fc;
    fc.frame_count = 10;
    fc.pixels_per_frame = 16;
    fc.spatial_rho = 0.9;
    fc.base_sigma = 30.0;
    fc.temporal_innovation_sigma = 1.0 + 3.0 * pick.uniform();
    fc.seed = derive_seed(seed, s);
    const double q1 = 0.05 + 0.85 * pick.uniform();
    const double alpha = 1.0 + 7.0 * pick.uniform();
    const PipelineConfig cfg(q1, alpha * q1, t);
    const Frames frames = gen_frame_sequence(fc);
    const Frames recon = code_predictive(frames, cfg);
    const Frames err = code_equivalent(frames, cfg);
    for (std::size_t f = 0; f < frames.size(); ++f)
      for (std::size_t i = 0; i < frames[f].size(); ++i)
        worst = std::max(worst, std::fabs((recon[f][i] - frames[f][i]) - err[f][i]));
  }
  out.push_back(near("prediction/residue-form-max-deviation", worst, 0.0, 1e-9));

  FrameSequenceConfig fc;
  fc.frame_count = 20;
  fc.pixels_per_frame = 1600;
  fc.spatial_rho = 0.9;
  fc.base_sigma = 30.0;
  fc.temporal_innovation_sigma = 4.0;
  fc.seed = derive_seed(seed, 1000);
  const double q1 = 0.2137;
  const PipelineConfig cfg(q1, 4.0 * q1, t);
  const Frames frames = gen_frame_sequence(fc);
  auto mse = [](const Frames& errs) {
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& f : errs)
      for (double e : f) {
        acc += e * e;
        ++count;
      }
    return acc / static_cast<double>(count);
  };
  out.push_back(near_rel("prediction/offset-dropped-mse", mse(code_residue_nonpredictive(frames, cfg)),
                         mse(code_equivalent(frames, cfg)), 0.05));
  return out;
}

// Nested-rounding centroid against its residue-function decomposition and
// against the main branch fed with lattice points.
std::vector<Check> centroid_suite(std::uint64_t seed) {
  std::vector<Check> out;
  const std::vector<OrthogonalTransform> ts = {make_rotation_2x2(), make_dct(4), make_dct(8),
                                               make_random_orthogonal(3, seed), make_random_orthogonal(16, seed + 1)};
  Rng rng(derive_seed(seed, 0xc3));
  double forms = 0.0, lattice = 0.0, branch = 0.0;
  for (int draw = 0; draw < 10000; ++draw) {
    const auto& t = ts[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(ts.size()) - 1))];
    const double q1 = 0.1 + 1.9 * rng.uniform();
    const double q2 = q1 * (1.0 + 7.0 * rng.uniform());
    std::vector<std::int64_t> p(t.size());
    for (auto& v : p) v = rng.uniform_int(-1000, 1000);
    const auto direct = reconstruction_centroid(p, q1, q2, t);
    const auto parts = decompose_centroid(p, q1, q2, t);
    for (std::size_t k = 0; k < p.size(); ++k) {
      forms = std::max(forms, std::fabs(direct[k] - parts.centroid[k]));
      lattice = std::max(lattice, std::fabs(direct[k] / q1 - std::round(direct[k] / q1)));
    }
    // Generic transforms only: dyadic DCT rows can put the codec input exactly
    // on a rounding tie, where the two evaluation orders may differ.
    if (t.name().rfind("random", 0) == 0) {
      std::vector<double> m(p.size());
      for (std::size_t k = 0; k < p.size(); ++k) m[k] = q1 * static_cast<double>(p[k]);
      const auto coded = code_main_branch(m, PipelineConfig(q1, q2, t));
      for (std::size_t k = 0; k < p.size(); ++k)
        branch = std::max(branch, std::fabs(coded.reconstruction[k] - direct[k]));
    }
  }
  out.push_back(near("centroid/forms-max-deviation", forms, 0.0, 1e-9));
  out.push_back(near("centroid/lattice-max-offset", lattice, 0.0, 1e-9));
  out.push_back(near("centroid/main-branch-max-deviation", branch, 0.0, 1e-9));
  return out;
}

// Exhaustive cell enumeration against the closed-form E[d^2].
std::vector<Check> d2_suite(std::uint64_t seed) {
  std::vector<Check> out;
  const auto t = make_rotation_2x2();
  for (double alpha : {8.0, 4.0, 2.0}) {
    out.push_back(near_rel("d2/fine/alpha=" + fmt(alpha), oracle::expected_d2_bruteforce(1.0, alpha, t, 200),
                           expected_d2(1.0, alpha, 2, std::nullopt), 0.02));
  }
  GammaOptions opts;
  opts.seed = seed;
  for (double alpha : {1.0 / 0.6, 1.5, 1.25, 1.0}) {
    const auto g = estimate_gammas(t, alpha, opts);
    out.push_back(near_rel("d2/coarse/alpha=" + fmt(alpha), oracle::expected_d2_bruteforce(1.0, alpha, t, 200),
                           expected_d2(1.0, alpha, 2, g.coupling()), 0.03));
  }
  out.push_back(near("d2/aligned-1d", oracle::expected_d2_bruteforce(0.7, 0.7, make_dct(1), 200), 0.0, 1e-12));
  const double base = oracle::expected_d2_bruteforce(1.0, 1.37, t, 200);
  double spread = 0.0;
  for (std::size_t m : {100u, 400u})
    spread = std::max(spread, std::fabs(oracle::expected_d2_bruteforce(1.0, 1.37, t, m) / base - 1.0));
  out.push_back(near("d2/range-invariance", spread, 0.0, 0.01));
  return out;
}

// Monte Carlo main-branch distortion and rate on an AR(1) source.
std::vector<Check> pipeline_suite(std::uint64_t seed) {
  std::vector<Check> out;
  const double sigma = 1.0 / std::sqrt(1.0 - 0.4 * 0.4);
  const auto t = make_dct(16);
  const std::size_t blocks = 50000;
  Ar1Config src{0.4, sigma, 0, seed};

  const double q2n = sigma / 5.0;
  const PipelineConfig negligible(q2n * kNegligibleStepScale, q2n, t);
  out.push_back(near_rel("pipeline/negligible-q1-mse", oracle::pipeline_mc_distortion(negligible, src, blocks),
                         q2n * q2n / 12.0, 0.03));

  const double q2 = sigma / 4.0;
  GammaOptions gopts;
  gopts.seed = seed;
  gopts.samples = 50000;
  for (double alpha : {8.0, 4.0, 2.0, 1.5, 1.0}) {
    const double q1 = q2 / alpha;
    std::optional<CouplingStats> stats;
    if (regime_for(q1, q2) == Regime::coarse) stats = estimate_gammas(t, alpha, gopts).coupling();
    const double predicted = overall_distortion(q1, q2, t.size(), stats).d_total / static_cast<double>(t.size());
    out.push_back(near_rel("pipeline/mse/alpha=" + fmt(alpha),
                           oracle::pipeline_mc_distortion(PipelineConfig(q1, q2, t), src, blocks), predicted,
                           alpha >= 2.0 ? 0.03 : 0.05));
  }

  const std::vector<double> zeros(16 * 100, 0.0);
  out.push_back(near("pipeline/zero-input-mse", oracle::pipeline_mc_distortion(PipelineConfig(0.1, 0.4, t), zeros),
                     0.0, 0.0));

  src.length = blocks * t.size();
  const auto signal = gen_ar1(src);
  const double ref_rate = measure_rd_point(signal, PipelineConfig(q2 / 8.0, q2, t)).bits_per_sample;
  for (double div : {4.0, 2.0, 1.0}) {
    out.push_back(near_rel("pipeline/rate/q1=q2/" + fmt(div),
                           measure_rd_point(signal, PipelineConfig(q2 / div, q2, t)).bits_per_sample, ref_rate,
                           0.02));
  }
  return out;
}

using SuiteFn = std::vector<Check> (*)(std::uint64_t);

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> r = {
      {"hypercube", hypercube_suite}, {"prediction", prediction_suite}, {"centroid", centroid_suite},
      {"d2", d2_suite},               {"pipeline", pipeline_suite},
  };
  return r;
}

// Alternative suite names accepted on the command line.
const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a = {{"lemma1", "prediction"}, {"lemma2", "hypercube"}};
  return a;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"prediction", "hypercube", "centroid", "d2", "pipeline"};
  return names;
}

std::vector<Check> run_suite(const std::string& suite, std::uint64_t seed) {
  std::string name = suite;
  if (const auto a = aliases().find(name); a != aliases().end()) name = a->second;
  const auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown verification suite '" + suite + "'");
  return it->second(seed);
}

}  // namespace bbq::cli
