#include "mem/exploration/point_set.hpp"

#include <cmath>
#include <string>

#include "mem/errors.hpp"

namespace mem::exploration {

PointSet::PointSet(std::size_t n, std::size_t q, std::vector<double> coords)
    : n_(n), q_(q), coords_(std::move(coords)) {
  if (n_ == 0 || q_ == 0) throw ShapeMismatch("point set needs n >= 1 and q >= 1");
  if (coords_.size() != n_ * q_) {
    throw ShapeMismatch("point set of " + std::to_string(n_) + "x" + std::to_string(q_) + " given " +
                        std::to_string(coords_.size()) + " coordinates");
  }
  for (double x : coords_) {
    if (!std::isfinite(x)) throw ShapeMismatch("point set contains a non-finite coordinate");
  }
}

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t q = rows.empty() ? 0 : rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * q);
  for (const auto& r : rows) {
    if (r.size() != q) throw ShapeMismatch("point rows differ in dimension");
    coords.insert(coords.end(), r.begin(), r.end());
  }
  return PointSet(rows.size(), q, std::move(coords));
}

PointSet PointSet::from_scalars(const std::vector<double>& values) { return PointSet(values.size(), 1, values); }

PointSet PointSet::permuted(const std::vector<std::size_t>& order) const {
  std::vector<double> coords;
  coords.reserve(coords_.size());
  for (std::size_t i : order) {
    auto p = point(i);
    coords.insert(coords.end(), p.begin(), p.end());
  }
  return PointSet(n_, q_, std::move(coords));
}

PointSet PointSet::scaled(double c) const {
  std::vector<double> coords = coords_;
  for (double& x : coords) x *= c;
  return PointSet(n_, q_, std::move(coords));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace mem::exploration
