#pragma once

#include <string>

#include "mem/ad/param_store.hpp"
#include "mem/ad/tape.hpp"
#include "mem/rng.hpp"

namespace mem::ad {

/// Adds `<prefix>.weight` [in x out] (Glorot-uniform, scaled by `gain`) and a
/// zero `<prefix>.bias` [1 x out].
void init_linear(ParamStore& params, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng,
                 double gain = 1.0);

/// x * W + b on the tape.
Var linear(Tape& tape, ParamStore& params, const std::string& prefix, Var x);

/// Same computation without recording anything.
Tensor linear_forward(const ParamStore& params, const std::string& prefix, const Tensor& x);

void relu_inplace(Tensor& t);
void layer_norm_rows_inplace(Tensor& t, double eps = 1e-5);

}  // namespace mem::ad
