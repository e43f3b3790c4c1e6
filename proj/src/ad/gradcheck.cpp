#include "mem/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mem::ad {

namespace {

double evaluate(const std::function<Var(Tape&)>& loss) {
  Tape tape;
  return loss(tape).value().item();
}

double central(const std::function<Var(Tape&)>& loss, double& x, double h) {
  const double saved = x;
  x = saved + h;
  const double fp = evaluate(loss);
  x = saved - h;
  const double fm = evaluate(loss);
  x = saved;
  return (fp - fm) / (2.0 * h);
}

}  // namespace

GradCheckResult check_gradients(const std::vector<ParamStore*>& stores, const std::function<Var(Tape&)>& loss,
                                const GradCheckOptions& options) {
  for (ParamStore* s : stores) s->zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  GradCheckResult result;
  for (std::size_t si = 0; si < stores.size(); ++si) {
    ParamStore& store = *stores[si];
    for (const std::string& name : store.names()) {
      Tensor& value = store.value(name);
      const Tensor analytic = store.grad(name);
      for (std::size_t i = 0; i < value.size(); ++i) {
        const double numeric = central(loss, value[i], options.step);
        const double half = central(loss, value[i], options.step / 2.0);
        if (std::abs(numeric - half) > options.kink_tolerance) {
          ++result.skipped;
          continue;
        }
        const double a = analytic[i];
        const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
        const double rel = std::abs(a - numeric) / denom;
        ++result.checked;
        if (rel > result.max_rel_error) {
          result.max_rel_error = rel;
          result.worst = std::to_string(si) + ":" + name + "[" + std::to_string(i) + "]";
        }
      }
    }
  }
  for (ParamStore* s : stores) s->zero_grad();
  return result;
}

}  // namespace mem::ad
