#include "mem/exploration/knn.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "mem/errors.hpp"

namespace mem::exploration {

namespace {

struct Candidate {
  double d2;
  std::size_t index;
  bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
};

void validate(const PointSet& points, std::size_t k) {
  if (k == 0) throw KTooLarge("k must be at least 1");
  if (k >= points.size()) {
    throw KTooLarge("k = " + std::to_string(k) + " needs at least " + std::to_string(k + 1) + " points, got " +
                    std::to_string(points.size()));
  }
}

std::vector<Neighbor> finish(std::vector<Candidate> c) {
  std::sort(c.begin(), c.end());
  std::vector<Neighbor> out;
  out.reserve(c.size());
  for (const auto& x : c) out.push_back({std::sqrt(x.d2), x.index});
  return out;
}

}  // namespace

KdTree::KdTree(const PointSet& points, std::size_t leaf_size)
    : points_(&points), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  order_.resize(points.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * points.size() / leaf_size_ + 2);
  build(0, order_.size());
}

int KdTree::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= leaf_size_) return id;

  const std::size_t q = points_->dim();
  std::size_t best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t d = 0; d < q; ++d) {
    double lo = points_->point(order_[begin])[d], hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      const double v = points_->point(order_[i])[d];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = d;
    }
  }
  if (best_spread <= 0.0) return id;  // all points coincide; keep as a leaf

  const std::size_t mid = begin + (end - begin) / 2;
  auto key_less = [&](std::size_t a, std::size_t b) {
    const double va = points_->point(a)[best_dim], vb = points_->point(b)[best_dim];
    return va < vb || (va == vb && a < b);
  };
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), key_less);
  nodes_[id].split_dim = best_dim;
  nodes_[id].split_value = points_->point(order_[mid])[best_dim];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> KdTree::nearest(std::size_t query, std::size_t k) const {
  validate(*points_, k);
  if (query >= points_->size()) throw IndexOutOfRange("query index " + std::to_string(query));
  const auto qp = points_->point(query);
  std::priority_queue<Candidate> heap;  // max-heap on (d2, index)

  auto visit = [&](auto&& self, int node_id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t j = order_[i];
        if (j == query) continue;
        const Candidate c{squared_distance(qp, points_->point(j)), j};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = qp[node.split_dim] - node.split_value;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    // diff*diff never exceeds the computed distance to any point across the
    // split, so pruning only on strict excess keeps the search exact.
    if (heap.size() < k || diff * diff <= heap.top().d2) self(self, far);
  };
  visit(visit, 0);

  std::vector<Candidate> found;
  found.reserve(heap.size());
  while (!heap.empty()) {
    found.push_back(heap.top());
    heap.pop();
  }
  return finish(std::move(found));
}

std::vector<Neighbor> knn_brute(const PointSet& points, std::size_t index, std::size_t k) {
  validate(points, k);
  if (index >= points.size()) throw IndexOutOfRange("query index " + std::to_string(index));
  const auto qp = points.point(index);
  std::vector<Candidate> all;
  all.reserve(points.size() - 1);
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (j != index) all.push_back({squared_distance(qp, points.point(j)), j});
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return finish(std::move(all));
}

double knn_distance(const PointSet& points, std::size_t index, std::size_t k) {
  return knn_brute(points, index, k).back().distance;
}

namespace {

// Above this many points the pairwise matrix is not worth its memory.
constexpr std::size_t kPairwiseLimit = 2048;

template <typename Reduce>
std::vector<double> batch(const PointSet& points, std::size_t k, KnnMethod method, Reduce reduce) {
  validate(points, k);
  std::vector<double> out(points.size());
  if (method == KnnMethod::tree) {
    const KdTree tree(points);
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = reduce(tree.nearest(i, k));
  } else if (points.size() <= kPairwiseLimit) {
    // Squared distances are symmetric bit-for-bit, so each pair is computed once.
    const std::size_t n = points.size();
    std::vector<double> d2(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) d2[i * n + j] = d2[j * n + i] = squared_distance(points.point(i), points.point(j));
    }
    std::vector<Candidate> row;
    row.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      row.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) row.push_back({d2[i * n + j], j});
      }
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
      row.resize(k);
      out[i] = reduce(finish(row));
    }
  } else {
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = reduce(knn_brute(points, i, k));
  }
  return out;
}

}  // namespace

std::vector<double> knn_distances_batch(const PointSet& points, std::size_t k, KnnMethod method) {
  return batch(points, k, method, [](const std::vector<Neighbor>& nb) { return nb.back().distance; });
}

std::vector<double> knn_mean_distances_batch(const PointSet& points, std::size_t k, KnnMethod method) {
  return batch(points, k, method, [](const std::vector<Neighbor>& nb) {
    double s = 0.0;
    for (const auto& n : nb) s += n.distance;
    return s / static_cast<double>(nb.size());
  });
}

KnnMethod default_method(std::size_t n) { return n >= 512 ? KnnMethod::tree : KnnMethod::brute; }

}  // namespace mem::exploration
