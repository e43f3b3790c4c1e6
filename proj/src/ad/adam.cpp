#include "mem/ad/adam.hpp"

#include <cmath>

namespace mem::ad {

void Adam::step(ParamStore& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (const std::string& name : params.names()) {
    Tensor& p = params.value(name);
    const Tensor& g = params.grad(name);
    auto [mit, m_new] = m_.try_emplace(name, Tensor(p.shape()));
    auto [vit, v_new] = v_.try_emplace(name, Tensor(p.shape()));
    Tensor& m = mit->second;
    Tensor& v = vit->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

}  // namespace mem::ad
