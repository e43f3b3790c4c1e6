#include "mem/ad/param_store.hpp"

#include "mem/errors.hpp"

namespace mem::ad {

void ParamStore::add(const std::string& name, Tensor value) {
  Tensor grad(value.shape());
  values_.insert_or_assign(name, std::move(value));
  grads_.insert_or_assign(name, std::move(grad));
}

Tensor& ParamStore::value(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw IndexOutOfRange("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw IndexOutOfRange("unknown parameter '" + name + "'");
  return it->second;
}

Tensor& ParamStore::grad(const std::string& name) {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw IndexOutOfRange("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamStore::grad(const std::string& name) const {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw IndexOutOfRange("unknown parameter '" + name + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, g] : grads_) g.fill(0.0);
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [name, v] : values_) out.push_back(name);
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : values_) n += v.size();
  return n;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  values_ = other.values_;
  grads_.clear();
  for (const auto& [name, v] : values_) grads_.emplace(name, Tensor(v.shape()));
}

void ParamStore::export_to(std::map<std::string, Tensor>& out, const std::string& prefix) const {
  for (const auto& [name, v] : values_) out.insert_or_assign(prefix + name, v);
}

void ParamStore::import_from(const std::map<std::string, Tensor>& in, const std::string& prefix) {
  for (auto& [name, v] : values_) {
    auto it = in.find(prefix + name);
    if (it == in.end()) throw CheckpointCorrupt("missing parameter '" + prefix + name + "'");
    if (!it->second.same_shape(v)) {
      throw CheckpointCorrupt("parameter '" + prefix + name + "' has shape " + it->second.shape_string() +
                              ", expected " + v.shape_string());
    }
    v = it->second;
  }
}

}  // namespace mem::ad
