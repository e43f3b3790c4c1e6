#pragma once

#include <map>
#include <string>
#include <vector>

#include "mem/ad/tensor.hpp"

namespace mem::ad {

/// Named parameters with matching gradient accumulators. Names iterate in
/// lexicographic order, which fixes the order of checkpoint records.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return values_.contains(name); }

  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;

  void zero_grad();
  std::vector<std::string> names() const;
  std::size_t parameter_count() const;

  /// Copies values only; gradients of `this` are zeroed.
  void copy_values_from(const ParamStore& other);

  /// Inserts every parameter into `out` under `prefix + name`.
  void export_to(std::map<std::string, Tensor>& out, const std::string& prefix) const;
  /// Overwrites every parameter from `in[prefix + name]`; shapes must agree.
  void import_from(const std::map<std::string, Tensor>& in, const std::string& prefix);

  friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.values_ == b.values_; }

 private:
  std::map<std::string, Tensor> values_;
  std::map<std::string, Tensor> grads_;
};

}  // namespace mem::ad
