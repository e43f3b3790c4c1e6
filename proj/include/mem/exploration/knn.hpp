#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "mem/exploration/point_set.hpp"

namespace mem::exploration {

enum class KnnMethod { brute, tree };

struct Neighbor {
  double distance;
  std::size_t index;
};

/// Exact k-d tree over a PointSet. Immutable after construction, so one tree
/// may serve queries from several threads.
class KdTree {
 public:
  explicit KdTree(const PointSet& points, std::size_t leaf_size = 8);

  /// The k nearest points to points[query] other than itself, ordered by
  /// (distance, index).
  std::vector<Neighbor> nearest(std::size_t query, std::size_t k) const;

 private:
  struct Node {
    std::size_t begin, end;  // range into order_
    std::size_t split_dim = 0;
    double split_value = 0.0;
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end);

  const PointSet* points_;
  std::size_t leaf_size_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// The k nearest other points to points[index], ordered by (distance, index).
/// Throws KTooLarge when k >= n and IndexOutOfRange for a bad index.
std::vector<Neighbor> knn_brute(const PointSet& points, std::size_t index, std::size_t k);

/// Distance from points[index] to its k-th nearest other point.
double knn_distance(const PointSet& points, std::size_t index, std::size_t k);

/// knn_distance for every point. Both methods return bit-identical vectors.
std::vector<double> knn_distances_batch(const PointSet& points, std::size_t k, KnnMethod method = KnnMethod::brute);

/// Mean distance to the k nearest other points, for every point.
std::vector<double> knn_mean_distances_batch(const PointSet& points, std::size_t k,
                                             KnnMethod method = KnnMethod::brute);

/// Tree for large pools, brute force otherwise.
KnnMethod default_method(std::size_t n);

}  // namespace mem::exploration
