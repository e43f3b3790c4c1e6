#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mem/ad/param_store.hpp"
#include "mem/ad/tensor.hpp"

namespace mem::ad {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  /// Gradient of the last backward() output w.r.t. this node (zeros if unreached).
  Tensor grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run gradient tape. Build a fresh tape per forward pass, call
/// backward() on a scalar, and parameter gradients land in their ParamStore.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to `store.value(name)`. Repeated calls return the same node.
  Var param(ParamStore& store, const std::string& name);
  /// Records an op output. The node needs a gradient iff any input does.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  /// Seeds d(output)/d(output) = 1 and accumulates into ParamStore gradients.
  void backward(Var output);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad_of(std::size_t id) const { return nodes_[id].grad; }
  bool has_grad(std::size_t id) const { return nodes_[id].has_grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient accumulator of an input, or nullptr when it needs no gradient.
  Tensor* grad_sink(std::size_t id);
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
    ParamStore* store = nullptr;
    std::string name;
  };

  std::vector<Node> nodes_;
  std::map<std::pair<const ParamStore*, std::string>, std::size_t> param_ids_;
};

// Ops. Every op takes rank-2 inputs and returns a rank-2 output.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// m x n plus a 1 x n (or length-n) bias added to every row.
Var add_row(Var m, Var bias);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
/// ReLU with derivative 0 at exactly 0.
Var relu(Var a);
Var square(Var a);
Var sum(Var a);
Var mean(Var a);
/// Row sums, m x 1.
Var sum_rows(Var a);
Var l1_rows(Var a);
/// Euclidean row norms; the gradient at a zero row is 0.
Var l2norm_rows(Var a);
/// Row-wise cosine similarity; rows where either norm is below 1e-12 give 0
/// with zero gradient.
Var cosine_rows(Var a, Var b);
Var layer_norm_rows(Var a, double eps = 1e-5);
/// Per-row -log softmax(row)[label].
Var softmax_cross_entropy_rows(Var logits, const std::vector<std::size_t>& labels);
/// Per-row cross-entropy against the uniform distribution over columns.
Var uniform_cross_entropy_rows(Var logits);
/// Per-row Shannon entropy of softmax(row).
Var entropy_rows(Var logits);
/// Picks a[r, index[r]] for each row, m x 1.
Var gather_cols(Var a, const std::vector<std::size_t>& index);
/// Row r becomes the mean of all rows sharing labels[r] (anchor included) or,
/// with `complement`, the mean of all rows with a different label.
Var group_centroids(Var a, const std::vector<std::size_t>& labels, bool complement);

}  // namespace mem::ad
