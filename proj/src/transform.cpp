#include "bbq/transform.hpp"

#include "bbq/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bbq {

struct OrthogonalTransform::Data {
  std::size_t n = 0;
  std::string name;
  std::vector<double> rows;     // row-major T
  std::vector<double> columns;  // row-major T^T
  // Non-zero when T = C (x) C for a k x k factor C; enables the separable path.
  std::size_t factor_size = 0;
  std::vector<double> factor;
};

namespace {

void check_length(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": vector length " + std::to_string(got) +
                                " does not match transform size " + std::to_string(expected));
  }
}

bool overlaps(std::span<const double> a, std::span<double> b) {
  const auto* a0 = a.data();
  const auto* b0 = b.data();
  return a0 < b0 + b.size() && b0 < a0 + a.size();
}

std::vector<double> transpose(const std::vector<double>& m, std::size_t n) {
  std::vector<double> t(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t[j * n + i] = m[i * n + j];
  return t;
}

double max_gram_deviation(const std::vector<double>& m, std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += m[k * n + i] * m[k * n + j];
      worst = std::max(worst, std::fabs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

std::vector<double> dct_matrix(std::size_t n) {
  std::vector<double> m(n * n);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = std::numbers::pi * static_cast<double>((2 * i + 1) * k) / (2.0 * nd);
      m[k * n + i] = scale * std::cos(angle);
    }
  }
  return m;
}

// y[a*k+b] = sum_ij C[a,i] X[i,j] C[b,j]; with transpose_factor the roles of
// C and C^T swap, giving the inverse.
void separable_apply(const std::vector<double>& c, std::size_t k, std::span<const double> x,
                     std::span<double> y, bool transpose_factor) {
  thread_local std::vector<double> tmp;
  tmp.assign(k * k, 0.0);
  auto coef = [&](std::size_t r, std::size_t s) {
    return transpose_factor ? c[s * k + r] : c[r * k + s];
  };
  // tmp = X * F^T (act on rows of the block)
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t b = 0; b < k; ++b) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += x[i * k + j] * coef(b, j);
      tmp[i * k + b] = acc;
    }
  // y = F * tmp (act on columns)
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < k; ++i) {
      const double f = coef(a, i);
      for (std::size_t b = 0; b < k; ++b) y[a * k + b] += f * tmp[i * k + b];
    }
}

// out = sum_j in[j] * lines[j], where lines is row-major n x n.
void combine_lines(const std::vector<double>& lines, std::size_t n, std::span<const double> in,
                   std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = in[j];
    if (w == 0.0) continue;
    const double* line = lines.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) out[i] += w * line[i];
  }
}

}  // namespace

OrthogonalTransform::OrthogonalTransform(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

OrthogonalTransform OrthogonalTransform::from_rows(std::vector<double> row_major, std::size_t n,
                                                   std::string name) {
  if (n == 0) throw std::invalid_argument("OrthogonalTransform: size must be positive");
  if (row_major.size() != n * n) {
    throw std::invalid_argument("OrthogonalTransform: expected " + std::to_string(n * n) +
                                " entries, got " + std::to_string(row_major.size()));
  }
  for (double v : row_major) {
    if (!std::isfinite(v)) throw std::invalid_argument("OrthogonalTransform: non-finite entry");
  }
  const double err = max_gram_deviation(row_major, n);
  if (!(err <= kOrthogonalityTolerance)) {
    throw std::invalid_argument("OrthogonalTransform: matrix is not orthogonal (max |T^T T - I| = " +
                                std::to_string(err) + ")");
  }
  auto data = std::make_shared<Data>();
  data->n = n;
  data->name = std::move(name);
  data->columns = transpose(row_major, n);
  data->rows = std::move(row_major);
  return OrthogonalTransform(std::move(data));
}

std::size_t OrthogonalTransform::size() const noexcept { return data_->n; }

const std::string& OrthogonalTransform::name() const noexcept { return data_->name; }

double OrthogonalTransform::at(std::size_t row, std::size_t col) const {
  if (row >= data_->n || col >= data_->n) throw std::out_of_range("OrthogonalTransform::at");
  return data_->rows[row * data_->n + col];
}

std::span<const double> OrthogonalTransform::row(std::size_t n) const {
  if (n >= data_->n) throw std::out_of_range("OrthogonalTransform::row");
  return {data_->rows.data() + n * data_->n, data_->n};
}

std::vector<double> OrthogonalTransform::column(std::size_t n) const {
  if (n >= data_->n) throw std::out_of_range("OrthogonalTransform::column");
  const double* c = data_->columns.data() + n * data_->n;
  return {c, c + data_->n};
}

std::span<const double> OrthogonalTransform::row_major() const noexcept { return data_->rows; }

void OrthogonalTransform::apply(std::span<const double> x, std::span<double> y) const {
  check_length(data_->n, x.size(), "apply");
  check_length(data_->n, y.size(), "apply");
  if (overlaps(x, y)) {
    const std::vector<double> copy(x.begin(), x.end());
    apply(copy, y);
    return;
  }
  if (data_->factor_size != 0) {
    separable_apply(data_->factor, data_->factor_size, x, y, false);
  } else {
    // T x = sum_j x_j * (column j of T) = sum_j x_j * (row j of T^T)
    combine_lines(data_->columns, data_->n, x, y);
  }
}

std::vector<double> OrthogonalTransform::apply(std::span<const double> x) const {
  std::vector<double> y(data_->n);
  apply(x, y);
  return y;
}

void OrthogonalTransform::apply_inverse(std::span<const double> y, std::span<double> x) const {
  check_length(data_->n, y.size(), "apply_inverse");
  check_length(data_->n, x.size(), "apply_inverse");
  if (overlaps(y, x)) {
    const std::vector<double> copy(y.begin(), y.end());
    apply_inverse(copy, x);
    return;
  }
  if (data_->factor_size != 0) {
    separable_apply(data_->factor, data_->factor_size, y, x, true);
  } else {
    // T^T y = sum_i y_i * (row i of T)
    combine_lines(data_->rows, data_->n, y, x);
  }
}

std::vector<double> OrthogonalTransform::apply_inverse(std::span<const double> y) const {
  std::vector<double> x(data_->n);
  apply_inverse(y, x);
  return x;
}

double OrthogonalTransform::orthogonality_error() const { return max_gram_deviation(data_->rows, data_->n); }

OrthogonalTransform make_rotation_2x2() {
  const double r = std::numbers::sqrt2 / 2.0;
  return OrthogonalTransform::from_rows({r, r, -r, r}, 2, "rot2");
}

OrthogonalTransform make_dct(std::size_t n) {
  if (n == 0) throw std::invalid_argument("make_dct: size must be positive");
  return OrthogonalTransform::from_rows(dct_matrix(n), n, "dct:" + std::to_string(n));
}

OrthogonalTransform make_dct_2d(std::size_t k) {
  if (k == 0) throw std::invalid_argument("make_dct_2d: size must be positive");
  const std::vector<double> c = dct_matrix(k);
  const std::size_t n = k * k;
  std::vector<double> full(n * n);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) full[(a * k + b) * n + (i * k + j)] = c[a * k + i] * c[b * k + j];
  const OrthogonalTransform dense = OrthogonalTransform::from_rows(std::move(full), n);
  auto data = std::make_shared<OrthogonalTransform::Data>(*dense.data_);
  data->name = "dct2d:" + std::to_string(k);
  data->factor_size = k;
  data->factor = c;
  return OrthogonalTransform(std::move(data));
}

OrthogonalTransform make_identity(std::size_t n) {
  if (n == 0) throw std::invalid_argument("make_identity: size must be positive");
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
  return OrthogonalTransform::from_rows(std::move(m), n, "identity:" + std::to_string(n));
}

OrthogonalTransform make_random_orthogonal(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("make_random_orthogonal: size must be positive");
  Rng rng(seed);
  std::vector<double> m(n * n);
  for (double& v : m) v = rng.gaussian();
  // Modified Gram-Schmidt on the rows, two passes. Normalizing each row after
  // projection keeps the sign convention of a positive-diagonal R factor.
  for (std::size_t i = 0; i < n; ++i) {
    double* ri = m.data() + i * n;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const double* rj = m.data() + j * n;
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += ri[k] * rj[k];
        for (std::size_t k = 0; k < n; ++k) ri[k] -= dot * rj[k];
      }
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) norm += ri[k] * ri[k];
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < n; ++k) ri[k] /= norm;
  }
  return OrthogonalTransform::from_rows(std::move(m), n,
                                        "random:" + std::to_string(n) + ":" + std::to_string(seed));
}

OrthogonalTransform parse_transform(const std::string& spec) {
  auto parse_number = [&](const std::string& text, bool allow_zero) -> std::uint64_t {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() || (v == 0 && !allow_zero)) {
      throw std::invalid_argument("transform spec '" + spec + "': bad number '" + text + "'");
    }
    return v;
  };
  auto parse_size = [&](const std::string& text) { return static_cast<std::size_t>(parse_number(text, false)); };
  if (spec == "rot2") return make_rotation_2x2();
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("unknown transform spec '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  std::string rest = spec.substr(colon + 1);
  if (kind == "dct") return make_dct(parse_size(rest));
  if (kind == "dct2d") return make_dct_2d(parse_size(rest));
  if (kind == "identity") return make_identity(parse_size(rest));
  if (kind == "random") {
    const auto second = rest.find(':');
    std::uint64_t seed = 1;
    if (second != std::string::npos) {
      const std::string seed_text = rest.substr(second + 1);
      seed = parse_number(seed_text, true);
      rest = rest.substr(0, second);
    }
    return make_random_orthogonal(parse_size(rest), seed);
  }
  throw std::invalid_argument("unknown transform spec '" + spec + "'");
}

}  // namespace bbq
