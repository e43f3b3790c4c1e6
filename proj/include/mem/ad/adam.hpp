#pragma once

#include <map>
#include <string>

#include "mem/ad/param_store.hpp"

namespace mem::ad {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam over every parameter of one ParamStore, using the gradients
/// currently accumulated there.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(ParamStore& params);
  long steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
  long t_ = 0;
};

}  // namespace mem::ad
