#include "mem/ad/layers.hpp"

#include <cmath>

namespace mem::ad {

void init_linear(ParamStore& params, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng,
                 double gain) {
  const double bound = gain * std::sqrt(6.0 / static_cast<double>(in + out));
  Tensor w = Tensor::matrix(in, out);
  for (double& x : w.data()) x = rng.uniform(-bound, bound);
  params.add(prefix + ".weight", std::move(w));
  params.add(prefix + ".bias", Tensor::matrix(1, out));
}

Var linear(Tape& tape, ParamStore& params, const std::string& prefix, Var x) {
  return add_row(matmul(x, tape.param(params, prefix + ".weight")), tape.param(params, prefix + ".bias"));
}

Tensor linear_forward(const ParamStore& params, const std::string& prefix, const Tensor& x) {
  Tensor out = matmul(x, params.value(prefix + ".weight"));
  const Tensor& b = params.value(prefix + ".bias");
  const std::size_t cols = out.cols();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += b[c];
  }
  return out;
}

void relu_inplace(Tensor& t) {
  for (double& x : t.data()) x = x > 0.0 ? x : 0.0;
}

void layer_norm_rows_inplace(Tensor& t, double eps) {
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto row = t.row(r);
    const auto normed = layer_norm(row, eps);
    std::copy(normed.begin(), normed.end(), row.begin());
  }
}

}  // namespace mem::ad
