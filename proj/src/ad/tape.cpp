#include "mem/ad/tape.hpp"

#include <algorithm>
#include <cmath>

#include "mem/errors.hpp"

namespace mem::ad {

const Tensor& Var::value() const { return tape_->value(id_); }

Tensor Var::grad() const {
  if (tape_->has_grad(id_)) return tape_->grad_of(id_);
  return Tensor(value().shape());
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(ParamStore& store, const std::string& name) {
  auto key = std::make_pair(static_cast<const ParamStore*>(&store), name);
  if (auto it = param_ids_.find(key); it != param_ids_.end()) return Var(this, it->second);
  Node node;
  node.value = store.value(name);
  node.requires_grad = true;
  node.store = &store;
  node.name = name;
  nodes_.push_back(std::move(node));
  param_ids_.emplace(std::move(key), nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (const Var& v : inputs) {
    if (v.tape() != this) throw ShapeMismatch("op inputs belong to a different tape");
    node.requires_grad = node.requires_grad || nodes_[v.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor* Tape::grad_sink(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return &n.grad;
}

void Tape::backward(Var output) {
  if (output.tape() != this) throw ShapeMismatch("backward output belongs to a different tape");
  if (nodes_[output.id()].value.size() != 1) {
    throw NonScalarOutput("backward needs a scalar output, got " + nodes_[output.id()].value.shape_string());
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  Tensor* seed = grad_sink(output.id());
  if (seed == nullptr) return;  // output does not depend on any parameter
  (*seed)[0] = 1.0;
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad) continue;
    if (n.backward) n.backward(*this, id);
    if (n.store != nullptr) {
      Tensor& acc = n.store->grad(n.name);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += n.grad[i];
    }
  }
}

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    throw ShapeMismatch(std::string(op) + ": " + a.value().shape_string() + " vs " + b.value().shape_string());
  }
}

Tensor as_matrix(const Tensor& t) {
  if (t.rank() == 2) return t;
  return Tensor({t.rows(), t.cols()}, t.storage());
}

template <typename F>
Var unary(Var a, F&& f, Tape::BackwardFn backward) {
  Tensor out = as_matrix(a.value());
  for (double& x : out.data()) x = f(x);
  return a.tape()->record(std::move(out), {a}, std::move(backward));
}

}  // namespace

Var matmul(Var a, Var b) {
  Tensor out = matmul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    if (Tensor* da = t.grad_sink(ia)) {
      // da = g * b^T, accumulated row by row over b^T so zero gradients are skipped.
      std::vector<double> bt(n * k);
      for (std::size_t kk = 0; kk < k; ++kk) {
        for (std::size_t j = 0; j < n; ++j) bt[j * k + kk] = bv[kk * n + j];
      }
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data().data() + i * n;
        double* drow = da->data().data() + i * k;
        for (std::size_t j = 0; j < n; ++j) {
          const double gv = grow[j];
          if (gv == 0.0) continue;
          const double* brow = bt.data() + j * k;
          for (std::size_t kk = 0; kk < k; ++kk) drow[kk] += gv * brow[kk];
        }
      }
    }
    if (Tensor* db = t.grad_sink(ib)) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data().data() + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double x = av[i * k + kk];
          if (x == 0.0) continue;
          double* drow = db->data().data() + kk * n;
          for (std::size_t j = 0; j < n; ++j) drow[j] += x * grow[j];
        }
      }
    }
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out = as_matrix(a.value());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    for (std::size_t id : {ia, ib}) {
      if (Tensor* d = t.grad_sink(id)) {
        for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i];
      }
    }
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor out = as_matrix(a.value());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (Tensor* d = t.grad_sink(ia)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i];
    }
    if (Tensor* d = t.grad_sink(ib)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out = as_matrix(a.value());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (Tensor* d = t.grad_sink(ia)) {
      const Tensor& bv = t.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i] * bv[i];
    }
    if (Tensor* d = t.grad_sink(ib)) {
      const Tensor& av = t.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i] * av[i];
    }
  });
}

Var add_row(Var m, Var bias) {
  const std::size_t rows = m.value().rows(), cols = m.value().cols();
  if (bias.value().size() != cols) {
    throw ShapeMismatch("add_row: bias " + bias.value().shape_string() + " vs matrix " + m.value().shape_string());
  }
  Tensor out = as_matrix(m.value());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bias.value()[c];
  }
  const std::size_t im = m.id(), ib = bias.id();
  return m.tape()->record(std::move(out), {m, bias}, [im, ib, rows, cols](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (Tensor* d = t.grad_sink(im)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i];
    }
    if (Tensor* d = t.grad_sink(ib)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) (*d)[c] += g[r * cols + c];
      }
    }
  });
}

Var scale(Var a, double c) {
  const std::size_t ia = a.id();
  return unary(a, [c](double x) { return c * x; }, [ia, c](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (Tensor* d = t.grad_sink(ia)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += c * g[i];
    }
  });
}

Var add_scalar(Var a, double c) {
  const std::size_t ia = a.id();
  return unary(a, [c](double x) { return x + c; }, [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (Tensor* d = t.grad_sink(ia)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += g[i];
    }
  });
}

Var relu(Var a) {
  const std::size_t ia = a.id();
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& av = t.value(ia);
    if (Tensor* d = t.grad_sink(ia)) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (av[i] > 0.0) (*d)[i] += g[i];
      }
    }
  });
}

Var square(Var a) {
  const std::size_t ia = a.id();
  return unary(a, [](double x) { return x * x; }, [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& av = t.value(ia);
    if (Tensor* d = t.grad_sink(ia)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*d)[i] += 2.0 * av[i] * g[i];
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  const std::size_t ia = a.id();
  return a.tape()->record(Tensor::scalar(s), {a}, [ia](Tape& t, std::size_t self) {
    const double g = t.grad_of(self)[0];
    if (Tensor* d = t.grad_sink(ia)) {
      for (double& x : d->data()) x += g;
    }
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeMismatch("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var sum_rows(Var a) {
  const std::size_t rows = a.value().rows(), cols = a.value().cols();
  Tensor out = Tensor::matrix(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (double x : a.value().row(r)) s += x;
    out[r] = s;
  }
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia, rows, cols](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    if (Tensor* d = t.grad_sink(ia)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) (*d)[r * cols + c] += g[r];
      }
    }
  });
}

Var l1_rows(Var a) {
  const std::size_t rows = a.value().rows(), cols = a.value().cols();
  Tensor out = Tensor::matrix(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (double x : a.value().row(r)) s += std::abs(x);
    out[r] = s;
  }
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia, rows, cols](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& av = t.value(ia);
    if (Tensor* d = t.grad_sink(ia)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double x = av[r * cols + c];
          const double sgn = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
          (*d)[r * cols + c] += sgn * g[r];
        }
      }
    }
  });
}

Var l2norm_rows(Var a) {
  const std::size_t rows = a.value().rows(), cols = a.value().cols();
  Tensor out = Tensor::matrix(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (double x : a.value().row(r)) s += x * x;
    out[r] = std::sqrt(s);
  }
  const std::size_t ia = a.id();
  return a.tape()->record(out, {a}, [ia, rows, cols, out](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& av = t.value(ia);
    if (Tensor* d = t.grad_sink(ia)) {
      for (std::size_t r = 0; r < rows; ++r) {
        if (out[r] == 0.0) continue;
        const double f = g[r] / out[r];
        for (std::size_t c = 0; c < cols; ++c) (*d)[r * cols + c] += f * av[r * cols + c];
      }
    }
  });
}

Var cosine_rows(Var a, Var b) {
  require_same_shape(a, b, "cosine_rows");
  const std::size_t rows = a.value().rows(), cols = a.value().cols();
  // Per row: cosine, |a|, |b|; degenerate rows store zeros.
  std::vector<double> na(rows), nb(rows);
  Tensor out = Tensor::matrix(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    auto ar = a.value().row(r);
    auto br = b.value().row(r);
    double dot = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      dot += ar[c] * br[c];
      sa += ar[c] * ar[c];
      sb += br[c] * br[c];
    }
    na[r] = std::sqrt(sa);
    nb[r] = std::sqrt(sb);
    out[r] = (na[r] < 1e-12 || nb[r] < 1e-12) ? 0.0 : dot / (na[r] * nb[r]);
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(out, {a, b}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad_of(self);
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    Tensor* da = t.grad_sink(ia);
    Tensor* db = t.grad_sink(ib);
    for (std::size_t r = 0; r < rows; ++r) {
      if (na[r] < 1e-12 || nb[r] < 1e-12) continue;
      const double inv = 1.0 / (na[r] * nb[r]);
      const double c = out[r];
      for (std::size_t k = 0; k < cols; ++k) {
        const double x = av[r * cols + k], y = bv[r * cols + k];
        if (da) (*da)[r * cols + k] += g[r] * (y * inv - c * x / (na[r] * na[r]));
        if (db) (*db)[r * cols + k] += g[r] * (x * inv - c * y / (nb[r] * nb[r]));
      }
    }
  });
}

Var layer_norm_rows(Var a, double eps) {
  const std::size_t rows = a.value().rows(), cols = a.value().cols();
  Tensor out = Tensor::matrix(rows, cols);
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto v = a.value().row(r);
    double mu = 0.0;
    for (double x : v) mu += x;
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (double x : v) var += (x - mu) * (x - mu);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = (v[c] - mu) * inv_std[r];
  }
  const std::size_t ia = a.id();
  return a.tape()->record(out, {a}, [=](Tape& t, std::size_t self) {
    Tensor* d = t.grad_sink(ia);
    if (d == nullptr) return;
    const Tensor& g = t.grad_of(self);
    const double n = static_cast<double>(cols);
    for (std::size_t r = 0; r < rows; ++r) {
      double gm = 0.0, gy = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        gm += g[r * cols + c];
        gy += g[r * cols + c] * out[r * cols + c];
      }
      gm /= n;
      gy /= n;
      for (std::size_t c = 0; c < cols; ++c) {
        (*d)[r * cols + c] += inv_std[r] * (g[r * cols + c] - gm - out[r * cols + c] * gy);
      }
    }
  });
}

namespace {

// Row-wise softmax probabilities and log-sum-exp.
void softmax_rows(const Tensor& logits, Tensor& probs, std::vector<double>& lse) {
  const std::size_t rows = logits.rows(), cols = logits.cols();
  probs = Tensor::matrix(rows, cols);
  lse.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    auto z = logits.row(r);
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      probs[r * cols + c] = std::exp(z[c] - mx);
      s += probs[r * cols + c];
    }
    for (std::size_t c = 0; c < cols; ++c) probs[r * cols + c] /= s;
    lse[r] = mx + std::log(s);
  }
}

}  // namespace

Var softmax_cross_entropy_rows(Var logits, const std::vector<std::size_t>& labels) {
  const std::size_t rows = logits.value().rows(), cols = logits.value().cols();
  if (labels.size() != rows) throw ShapeMismatch("softmax_cross_entropy_rows: label count differs from row count");
  for (std::size_t l : labels) {
    if (l >= cols) throw IndexOutOfRange("label " + std::to_string(l) + " outside [0, " + std::to_string(cols) + ")");
  }
  Tensor probs;
  std::vector<double> lse;
  softmax_rows(logits.value(), probs, lse);
  Tensor out = Tensor::matrix(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) out[r] = lse[r] - logits.value()[r * cols + labels[r]];
  const std::size_t il = logits.id();
  return logits.tape()->record(std::move(out), {logits}, [=](Tape& t, std::size_t self) {
    Tensor* d = t.grad_sink(il);
    if (d == nullptr) return;
    const Tensor& g = t.grad_of(self);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double target = c == labels[r] ? 1.0 : 0.0;
        (*d)[r * cols + c] += g[r] * (probs[r * cols + c] - target);
      }
    }
  });
}

Var uniform_cross_entropy_rows(Var logits) {
  const std::size_t rows = logits.value().rows(), cols = logits.value().cols();
  Tensor probs;
  std::vector<double> lse;
  softmax_rows(logits.value(), probs, lse);
  Tensor out = Tensor::matrix(rows, 1);
  const double inv_n = 1.0 / static_cast<double>(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double mz = 0.0;
    for (double z : logits.value().row(r)) mz += z;
    out[r] = lse[r] - mz * inv_n;
  }
  const std::size_t il = logits.id();
  return logits.tape()->record(std::move(out), {logits}, [=](Tape& t, std::size_t self) {
    Tensor* d = t.grad_sink(il);
    if (d == nullptr) return;
    const Tensor& g = t.grad_of(self);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) (*d)[r * cols + c] += g[r] * (probs[r * cols + c] - inv_n);
    }
  });
}

Var entropy_rows(Var logits) {
  const std::size_t rows = logits.value().rows(), cols = logits.value().cols();
  Tensor probs;
  std::vector<double> lse;
  softmax_rows(logits.value(), probs, lse);
  Tensor out = Tensor::matrix(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    double h = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double logp = logits.value()[r * cols + c] - lse[r];
      h -= probs[r * cols + c] * logp;
    }
    out[r] = h;
  }
  const std::size_t il = logits.id();
  return logits.tape()->record(out, {logits}, [=](Tape& t, std::size_t self) {
    Tensor* d = t.grad_sink(il);
    if (d == nullptr) return;
    const Tensor& g = t.grad_of(self);
    const Tensor& z = t.value(il);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double logp = z[r * cols + c] - lse[r];
        (*d)[r * cols + c] -= g[r] * probs[r * cols + c] * (logp + out[r]);
      }
    }
  });
}

Var gather_cols(Var a, const std::vector<std::size_t>& index) {
  const std::size_t rows = a.value().rows(), cols = a.value().cols();
  if (index.size() != rows) throw ShapeMismatch("gather_cols: index count differs from row count");
  Tensor out = Tensor::matrix(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    if (index[r] >= cols) throw IndexOutOfRange("gather_cols: column " + std::to_string(index[r]));
    out[r] = a.value()[r * cols + index[r]];
  }
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {a}, [=](Tape& t, std::size_t self) {
    Tensor* d = t.grad_sink(ia);
    if (d == nullptr) return;
    const Tensor& g = t.grad_of(self);
    for (std::size_t r = 0; r < rows; ++r) (*d)[r * cols + index[r]] += g[r];
  });
}

Var group_centroids(Var a, const std::vector<std::size_t>& labels, bool complement) {
  const std::size_t rows = a.value().rows(), cols = a.value().cols();
  if (labels.size() != rows) throw ShapeMismatch("group_centroids: label count differs from row count");
  const std::size_t groups = rows == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> count(groups, 0.0);
  Tensor group_sum = Tensor::matrix(groups, cols);
  Tensor total = Tensor::matrix(1, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    count[labels[r]] += 1.0;
    for (std::size_t c = 0; c < cols; ++c) {
      group_sum[labels[r] * cols + c] += a.value()[r * cols + c];
      total[c] += a.value()[r * cols + c];
    }
  }
  // Size of the set each row averages over, per label.
  std::vector<double> denom(groups);
  for (std::size_t l = 0; l < groups; ++l) {
    denom[l] = complement ? static_cast<double>(rows) - count[l] : count[l];
  }
  Tensor out = Tensor::matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t l = labels[r];
    if (denom[l] == 0.0) {
      throw EmptyGroup(complement ? "no rows outside the anchor's group" : "empty group");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const double s = complement ? total[c] - group_sum[l * cols + c] : group_sum[l * cols + c];
      out[r * cols + c] = s / denom[l];
    }
  }
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {a}, [=](Tape& t, std::size_t self) {
    Tensor* d = t.grad_sink(ia);
    if (d == nullptr) return;
    const Tensor& g = t.grad_of(self);
    // h[l] = sum of output grads of rows labelled l, divided by their set size.
    Tensor h = Tensor::matrix(groups, cols);
    Tensor htot = Tensor::matrix(1, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t l = labels[r];
      for (std::size_t c = 0; c < cols; ++c) h[l * cols + c] += g[r * cols + c] / denom[l];
    }
    for (std::size_t l = 0; l < groups; ++l) {
      for (std::size_t c = 0; c < cols; ++c) htot[c] += h[l * cols + c];
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t l = labels[r];
      for (std::size_t c = 0; c < cols; ++c) {
        (*d)[r * cols + c] += complement ? htot[c] - h[l * cols + c] : h[l * cols + c];
      }
    }
  });
}

}  // namespace mem::ad
