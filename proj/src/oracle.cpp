#include "bbq/oracle.hpp"

#include "bbq/theory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbq::oracle {

namespace {

constexpr double kMaxEnumeratedCells = 4.0e9;

void check_enumeration(double q1, double q2, std::size_t n, std::size_t m_range) {
  if (!std::isfinite(q1) || !std::isfinite(q2) || !(q1 > 0.0) || !(q1 <= q2)) {
    throw std::invalid_argument("expected_d2_bruteforce: requires 0 < q1 <= q2");
  }
  const double cells = std::pow(2.0 * static_cast<double>(m_range) + 1.0, static_cast<double>(n));
  if (cells > kMaxEnumeratedCells) {
    throw std::invalid_argument("expected_d2_bruteforce: (2M+1)^N too large to enumerate");
  }
}

// Calls fn(p) for every p in {-M..M}^n in lexicographic order.
template <class Fn>
void for_each_index(std::size_t n, std::int64_t m, Fn&& fn) {
  std::vector<std::int64_t> p(n, -m);
  for (;;) {
    fn(std::span<const std::int64_t>(p));
    std::size_t k = 0;
    while (k < n && p[k] == m) p[k++] = -m;
    if (k == n) return;
    ++p[k];
  }
}

double squared_offset(std::span<const std::int64_t> p, double q1, double q2, const OrthogonalTransform& t) {
  const auto m_hat = reconstruction_centroid(p, q1, q2, t);
  double d2 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double diff = q1 * static_cast<double>(p[k]) - m_hat[k];
    d2 += diff * diff;
  }
  return d2;
}

}  // namespace

void GridSpec::validate() const {
  if (resolution < 16) throw std::invalid_argument("GridSpec: resolution must be at least 16");
}

double hypercube_mse_numeric(std::size_t n_dim, double half_edge, std::span<const double> centroid, GridSpec grid) {
  grid.validate();
  if (n_dim < 1 || n_dim > 3) throw std::invalid_argument("hypercube_mse_numeric: n_dim must be 1, 2 or 3");
  if (centroid.size() != n_dim) throw std::invalid_argument("hypercube_mse_numeric: centroid size mismatch");
  if (!std::isfinite(half_edge) || !(half_edge > 0.0)) {
    throw std::invalid_argument("hypercube_mse_numeric: half edge must be positive");
  }
  const std::size_t r = grid.resolution;
  const double h = 2.0 * half_edge / static_cast<double>(r);
  std::vector<double> nodes(r);
  for (std::size_t i = 0; i < r; ++i) nodes[i] = -half_edge + (static_cast<double>(i) + 0.5) * h;

  // Plain nested loops over the full grid; no use of separability.
  const std::size_t ny = n_dim >= 2 ? r : 1;
  const std::size_t nz = n_dim >= 3 ? r : 1;
  double total = 0.0;
  for (std::size_t iz = 0; iz < nz; ++iz) {
    const double dz = n_dim >= 3 ? nodes[iz] - centroid[2] : 0.0;
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double dy = n_dim >= 2 ? nodes[iy] - centroid[1] : 0.0;
      double row = 0.0;
      for (std::size_t ix = 0; ix < r; ++ix) {
        const double dx = nodes[ix] - centroid[0];
        row += dx * dx + dy * dy + dz * dz;
      }
      total += row;
    }
  }
  return total / (static_cast<double>(r) * static_cast<double>(ny) * static_cast<double>(nz));
}

double expected_d2_bruteforce(double q1, double q2, const OrthogonalTransform& t, std::size_t m_range) {
  check_enumeration(q1, q2, t.size(), m_range);
  double total = 0.0;
  std::size_t count = 0;
  for_each_index(t.size(), static_cast<std::int64_t>(m_range), [&](std::span<const std::int64_t> p) {
    total += squared_offset(p, q1, q2, t);
    ++count;
  });
  return total / static_cast<double>(count);
}

double expected_d2_weighted(double q1, double q2, const OrthogonalTransform& t, std::size_t m_range,
                            const MarginalCdf& cdf) {
  check_enumeration(q1, q2, t.size(), m_range);
  const auto m = static_cast<std::int64_t>(m_range);
  std::vector<double> cell_prob(2 * m_range + 1);
  for (std::int64_t i = -m; i <= m; ++i) {
    const double lo = (static_cast<double>(i) - 0.5) * q1;
    const double hi = (static_cast<double>(i) + 0.5) * q1;
    cell_prob[static_cast<std::size_t>(i + m)] = cdf(hi) - cdf(lo);
  }
  double total = 0.0, mass = 0.0;
  for_each_index(t.size(), m, [&](std::span<const std::int64_t> p) {
    double w = 1.0;
    for (auto i : p) w *= cell_prob[static_cast<std::size_t>(i + m)];
    if (w <= 0.0) return;
    total += w * squared_offset(p, q1, q2, t);
    mass += w;
  });
  if (!(mass > 0.0)) throw std::invalid_argument("expected_d2_weighted: marginal puts no mass on the grid");
  return total / mass;
}

double pipeline_mc_distortion(const PipelineConfig& cfg, std::span<const double> signal) {
  const std::size_t n = cfg.block_len();
  const std::size_t block_count = signal.size() / n;
  if (block_count == 0) throw std::invalid_argument("pipeline_mc_distortion: signal shorter than one block");
  double total = 0.0;
  for (std::size_t b = 0; b < block_count; ++b) {
    const auto block = signal.subspan(b * n, n);
    const CodedBlock coded = code_main_branch(block, cfg);
    for (std::size_t k = 0; k < n; ++k) {
      const double e = coded.reconstruction[k] - block[k];
      total += e * e;
    }
  }
  return total / static_cast<double>(block_count * n);
}

double pipeline_mc_distortion(const PipelineConfig& cfg, const Ar1Config& source, std::size_t blocks) {
  if (blocks < kMinMonteCarloBlocks) {
    throw std::invalid_argument("pipeline_mc_distortion: need at least " + std::to_string(kMinMonteCarloBlocks) +
                                " blocks");
  }
  Ar1Config sized = source;
  sized.length = blocks * cfg.block_len();
  const auto signal = gen_ar1(sized);
  return pipeline_mc_distortion(cfg, signal);
}

}  // namespace bbq::oracle
