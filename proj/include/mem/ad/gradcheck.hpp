#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mem/ad/param_store.hpp"
#include "mem/ad/tape.hpp"

namespace mem::ad {

struct GradCheckOptions {
  double step = 1e-5;
  /// Denominator floor of the relative error: |a - n| / max(|a|, |n|, floor).
  double floor = 1e-3;
  /// A coordinate whose central differences at `step` and `step / 2` disagree
  /// by more than this straddles a kink (ReLU, |x|, max) and is skipped.
  double kink_tolerance = 1e-6;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;         // "<store index>:<param>[<element>]"
  std::size_t checked = 0;
  std::size_t skipped = 0;   // kink coordinates
};

/// Compares tape gradients of `loss` against central finite differences for
/// every element of every parameter in `stores`. `loss` must build a fresh
/// scalar on the tape it is given and be deterministic.
GradCheckResult check_gradients(const std::vector<ParamStore*>& stores, const std::function<Var(Tape&)>& loss,
                                const GradCheckOptions& options = {});

}  // namespace mem::ad
