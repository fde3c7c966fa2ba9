#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bbq {

/// Immutable N x N real orthogonal matrix acting on length-N vectors.
///
/// Copies share the underlying matrix, so passing by value is cheap and the
/// object may be used from several threads at once. The inverse is always
/// applied as the transpose.
class OrthogonalTransform {
 public:
  /// Maximum |T^T T - I| accepted at construction.
  static constexpr double kOrthogonalityTolerance = 1e-12;

  /// Builds from a row-major n x n matrix. Throws std::invalid_argument if
  /// the size is wrong or the matrix is not orthogonal to tolerance.
  static OrthogonalTransform from_rows(std::vector<double> row_major, std::size_t n,
                                       std::string name = "custom");

  std::size_t size() const noexcept;
  const std::string& name() const noexcept;

  double at(std::size_t row, std::size_t col) const;
  /// Row n of the matrix (v_n^T).
  std::span<const double> row(std::size_t n) const;
  /// Column n of the matrix (u_n).
  std::vector<double> column(std::size_t n) const;
  std::span<const double> row_major() const noexcept;

  /// y = T x.
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;

  /// x = T^T y.
  void apply_inverse(std::span<const double> y, std::span<double> x) const;
  std::vector<double> apply_inverse(std::span<const double> y) const;

  /// max |(T^T T - I)_{ij}|.
  double orthogonality_error() const;

 private:
  struct Data;
  explicit OrthogonalTransform(std::shared_ptr<const Data> data);
  friend OrthogonalTransform make_dct_2d(std::size_t k);

  std::shared_ptr<const Data> data_;
};

/// The 45-degree rotation (1/sqrt 2) [[1, 1], [-1, 1]].
OrthogonalTransform make_rotation_2x2();

/// Orthonormal DCT-II of size n (n >= 1).
OrthogonalTransform make_dct(std::size_t n);

/// Separable k x k two-dimensional DCT-II acting on row-major flattened
/// blocks of length k^2. Produces the same L x L matrix as the Kronecker
/// product of two size-k DCTs, but applies it in O(k^3) per block.
OrthogonalTransform make_dct_2d(std::size_t k);

OrthogonalTransform make_identity(std::size_t n);

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// sign-corrected R). Deterministic given the seed.
OrthogonalTransform make_random_orthogonal(std::size_t n, std::uint64_t seed);

/// Parses "rot2", "dct:N", "dct2d:K", "identity:N" or "random:N:SEED".
OrthogonalTransform parse_transform(const std::string& spec);

}  // namespace bbq
