#include "bbq/theory.hpp"

#include "bbq/quant.hpp"
#include "bbq/rng.hpp"
#include "parallel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bbq {

namespace {

constexpr std::size_t kGammaChunk = 4096;
// |s - round(s)| at or below this counts as an exactly-integer argument.
constexpr double kIntegerSlack = 1e-9;

void check_alpha(double alpha, const char* who) {
  if (!std::isfinite(alpha) || !(alpha >= 1.0)) {
    throw std::invalid_argument(std::string(who) + ": alpha must be >= 1");
  }
}

void check_steps(double q1, double q2, const char* who) {
  if (!std::isfinite(q1) || !std::isfinite(q2) || !(q1 > 0.0) || !(q2 > 0.0)) {
    throw std::invalid_argument(std::string(who) + ": steps must be positive");
  }
}

void check_size(const OrthogonalTransform& t, std::size_t n, const char* who) {
  if (t.size() != n) {
    throw std::invalid_argument(std::string(who) + ": index vector length " + std::to_string(n) +
                                " does not match transform size " + std::to_string(t.size()));
  }
}

struct GammaSums {
  double w2 = 0.0, w2_sq = 0.0;
  double yw = 0.0, yw_sq = 0.0;
  std::size_t degenerate = 0;
  std::size_t count = 0;

  void merge(const GammaSums& o) {
    w2 += o.w2;
    w2_sq += o.w2_sq;
    yw += o.yw;
    yw_sq += o.yw_sq;
    degenerate += o.degenerate;
    count += o.count;
  }
};

GammaSums gamma_pass(const OrthogonalTransform& t, double ratio, const GammaOptions& opt) {
  const std::size_t n = t.size();
  const std::size_t chunks = (opt.samples + kGammaChunk - 1) / kGammaChunk;
  const auto m = static_cast<std::int64_t>(opt.m_range);
  const double inverse_ratio = 1.0 / ratio;
  std::vector<GammaSums> partial(chunks);

  detail::for_each_chunk(chunks, opt.workers, [&](std::size_t c) {
    Rng rng(derive_seed(opt.seed, c));
    std::vector<double> p(n), s(n), y(n), z(n);
    GammaSums sums;
    const std::size_t begin = c * kGammaChunk;
    const std::size_t end = std::min(opt.samples, begin + kGammaChunk);
    for (std::size_t i = begin; i < end; ++i) {
      for (auto& v : p) v = static_cast<double>(rng.uniform_int(-m, m));
      t.apply(p, s);
      for (std::size_t k = 0; k < n; ++k) {
        const double arg = ratio * s[k];
        const double rounded = std::round(arg);
        if (std::fabs(arg - rounded) <= kIntegerSlack) ++sums.degenerate;
        y[k] = rounded - arg;
      }
      // z = T^-1 Y; W_n = g((q2/q1) z_n); Y^T T W = z . W
      t.apply_inverse(y, z);
      double w2 = 0.0, yw = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double w = residue_g(inverse_ratio * z[k]);
        w2 += w * w;
        yw += z[k] * w;
      }
      sums.w2 += w2;
      sums.w2_sq += w2 * w2;
      sums.yw += yw;
      sums.yw_sq += yw * yw;
      ++sums.count;
    }
    partial[c] = sums;
  });

  GammaSums total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

// Plug-in standard error of the mean.
double standard_error(double sum, double sum_sq, std::size_t count) {
  if (count < 2) return 0.0;
  const double nd = static_cast<double>(count);
  const double mean = sum / nd;
  const double var = std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0));
  return std::sqrt(var / nd);
}

}  // namespace

double hypercube_mse(std::size_t n_dim, double half_edge, double centroid_distance) {
  if (n_dim == 0) throw std::invalid_argument("hypercube_mse: n_dim must be positive");
  if (!std::isfinite(half_edge) || !(half_edge > 0.0)) {
    throw std::invalid_argument("hypercube_mse: half edge must be positive");
  }
  if (!std::isfinite(centroid_distance) || centroid_distance < 0.0) {
    throw std::invalid_argument("hypercube_mse: distance must be nonnegative");
  }
  return centroid_distance * centroid_distance + static_cast<double>(n_dim) / 3.0 * half_edge * half_edge;
}

bool GammaEstimate::consistent_with_fine_regime(double k) const {
  return std::fabs(gamma1 - 1.0) <= k * se_gamma1 && std::fabs(gamma12) <= k * se_gamma12;
}

GammaEstimate estimate_gammas(const OrthogonalTransform& t, double alpha, const GammaOptions& options) {
  check_alpha(alpha, "estimate_gammas");
  if (options.samples == 0) throw std::invalid_argument("estimate_gammas: samples must be positive");
  if (options.m_range == 0) throw std::invalid_argument("estimate_gammas: m_range must be positive");

  const double ratio = 1.0 / alpha;
  GammaSums sums = gamma_pass(t, ratio, options);
  const double n = static_cast<double>(t.size());

  GammaEstimate est;
  est.alpha = alpha;
  est.samples = sums.count;
  est.degenerate_fraction = static_cast<double>(sums.degenerate) / (static_cast<double>(sums.count) * n);

  if (est.degenerate_fraction > GammaEstimate::kDegenerateLimit) {
    const GammaSums jittered = gamma_pass(t, ratio * (1.0 + GammaEstimate::kRatioJitter), options);
    std::ostringstream msg;
    msg << "degenerate lattice alignment for " << t.name() << " at alpha=" << alpha << ": "
        << est.degenerate_fraction * 100.0 << "% of first-stage arguments are integers; q1/q2 jittered by "
        << GammaEstimate::kRatioJitter << " (relative), leaving "
        << 100.0 * static_cast<double>(jittered.degenerate) / (static_cast<double>(jittered.count) * n) << "%";
    est.warning = msg.str();
    est.jittered = true;
    sums = jittered;
  }

  const double scale = 12.0 / n;
  const double count = static_cast<double>(sums.count);
  est.gamma1 = scale * sums.w2 / count;
  est.gamma12 = scale * sums.yw / count;
  est.se_gamma1 = scale * standard_error(sums.w2, sums.w2_sq, sums.count);
  est.se_gamma12 = scale * standard_error(sums.yw, sums.yw_sq, sums.count);
  return est;
}

GammaCache::GammaCache(OrthogonalTransform t, GammaOptions options)
    : transform_(std::move(t)), options_(options) {}

const GammaEstimate& GammaCache::get(double alpha) {
  std::lock_guard lock(mutex_);
  auto it = cache_.find(alpha);
  if (it == cache_.end()) it = cache_.emplace(alpha, estimate_gammas(transform_, alpha, options_)).first;
  return it->second;
}

std::vector<double> reconstruction_centroid(std::span<const std::int64_t> p, double q1, double q2,
                                            const OrthogonalTransform& t) {
  check_steps(q1, q2, "reconstruction_centroid");
  check_size(t, p.size(), "reconstruction_centroid");
  const std::size_t n = p.size();
  std::vector<double> v(n), w(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = static_cast<double>(p[k]);
  t.apply(v, w);
  for (std::size_t k = 0; k < n; ++k) w[k] = std::round(q1 / q2 * w[k]);
  t.apply_inverse(w, v);
  for (std::size_t k = 0; k < n; ++k) v[k] = q1 * std::round(q2 / q1 * v[k]);
  return v;
}

CentroidDecomposition decompose_centroid(std::span<const std::int64_t> p, double q1, double q2,
                                         const OrthogonalTransform& t) {
  check_steps(q1, q2, "decompose_centroid");
  check_size(t, p.size(), "decompose_centroid");
  const std::size_t n = p.size();
  CentroidDecomposition out;
  out.first_residue.resize(n);
  out.second_residue.resize(n);
  out.centroid.resize(n);

  std::vector<double> v(n), s(n), z(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = static_cast<double>(p[k]);
  t.apply(v, s);
  for (std::size_t k = 0; k < n; ++k) out.first_residue[k] = residue_g(q1 / q2 * s[k]);
  t.apply_inverse(out.first_residue, z);
  for (std::size_t k = 0; k < n; ++k) {
    out.second_residue[k] = residue_g(q2 / q1 * z[k]);
    out.centroid[k] = q1 * v[k] + q2 * z[k] + q1 * out.second_residue[k];
  }
  return out;
}

Regime regime_for(double q1, double q2) {
  check_steps(q1, q2, "regime_for");
  if (q1 > q2) throw std::invalid_argument("regime_for: requires q1 <= q2");
  return q1 <= q2 / 2.0 ? Regime::fine : Regime::coarse;
}

const char* to_string(Regime r) noexcept { return r == Regime::fine ? "fine" : "coarse"; }

double expected_d2(double q1, double q2, std::size_t n_dim, std::optional<CouplingStats> stats) {
  if (n_dim == 0) throw std::invalid_argument("expected_d2: n_dim must be positive");
  const double nd = static_cast<double>(n_dim);
  if (regime_for(q1, q2) == Regime::fine) return nd * (q2 * q2 + q1 * q1) / 12.0;
  if (!stats) throw std::invalid_argument("expected_d2: coarse regime (q1 > q2/2) needs gamma estimates");
  return nd * (q2 * q2 + stats->gamma1 * q1 * q1 + 2.0 * stats->gamma12 * q2 * q1) / 12.0;
}

DistortionPrediction overall_distortion(double q1, double q2, std::size_t n_dim,
                                        std::optional<CouplingStats> stats) {
  DistortionPrediction d;
  d.q1 = q1;
  d.q2 = q2;
  d.n_dim = n_dim;
  d.regime = regime_for(q1, q2);
  d.e_d2 = expected_d2(q1, q2, n_dim, stats);
  d.d_total = d.e_d2 + static_cast<double>(n_dim) / 12.0 * q1 * q1;
  return d;
}

double coarse_regime_distortion(double q1, double q2, std::size_t n_dim, CouplingStats stats) {
  check_steps(q1, q2, "coarse_regime_distortion");
  const double nd = static_cast<double>(n_dim);
  return nd / 12.0 * (q2 * q2 + (1.0 + stats.gamma1) * q1 * q1 + 2.0 * stats.gamma12 * q2 * q1);
}

double snr_loss_fine_regime(double alpha) {
  check_alpha(alpha, "snr_loss_fine_regime");
  return 10.0 * std::log10(1.0 + 2.0 / (alpha * alpha));
}

double snr_loss_coarse_regime(double alpha, CouplingStats stats) {
  check_alpha(alpha, "snr_loss_coarse_regime");
  return 10.0 * std::log10(1.0 + (1.0 + stats.gamma1) / (alpha * alpha) + 2.0 * stats.gamma12 / alpha);
}

double snr_loss_two_baseband(double alpha, std::optional<CouplingStats> stats) {
  check_alpha(alpha, "snr_loss_two_baseband");
  if (alpha >= 2.0) return snr_loss_fine_regime(alpha);
  if (!stats) throw std::invalid_argument("snr_loss_two_baseband: alpha < 2 needs gamma estimates");
  return snr_loss_coarse_regime(alpha, *stats);
}

double snr_loss_two_baseband(double alpha, GammaCache& cache) {
  check_alpha(alpha, "snr_loss_two_baseband");
  if (alpha >= 2.0) return snr_loss_fine_regime(alpha);
  return snr_loss_coarse_regime(alpha, cache.get(alpha).coupling());
}

double snr_loss_one_baseband(double alpha) {
  check_alpha(alpha, "snr_loss_one_baseband");
  return 10.0 * std::log10(1.0 + 1.0 / (alpha * alpha));
}

}  // namespace bbq
