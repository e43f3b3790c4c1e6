#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mem::exploration {

/// n samples of dimension q, stored row-major.
class PointSet {
 public:
  PointSet(std::size_t n, std::size_t q, std::vector<double> coords);
  /// Builds from equally sized rows.
  static PointSet from_rows(const std::vector<std::vector<double>>& rows);
  /// One-dimensional samples.
  static PointSet from_scalars(const std::vector<double>& values);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return q_; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * q_, q_}; }
  const std::vector<double>& coords() const noexcept { return coords_; }

  /// Same points in the order given by `order` (a permutation of 0..n-1).
  PointSet permuted(const std::vector<std::size_t>& order) const;
  PointSet scaled(double c) const;

 private:
  std::size_t n_;
  std::size_t q_;
  std::vector<double> coords_;
};

/// Squared Euclidean distance, summed in coordinate order. Every k-NN path
/// uses this exact function so tree and brute-force results agree bitwise.
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace mem::exploration
