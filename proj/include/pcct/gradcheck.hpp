#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "pcct/tensor.hpp"

namespace pcct {

struct GradCheckResult {
  // max_i |analytic_i - numeric_i| / max(1, |numeric_i|)
  double max_rel_error = 0.0;
  // Set when the point sits on (or a step away from) a nondifferentiable kink.
  // The error value is not meaningful then; perturb the point and retry.
  bool kink = false;
  std::size_t kink_coordinate = 0;
};

// Compares the reverse-mode gradient of `loss_fn` at `point` against central
// finite differences. `loss_fn` receives a rank-1 tensor holding the point and
// must return a scalar.
GradCheckResult finite_diff_check(const std::function<Tensor(const Tensor&)>& loss_fn,
                                  std::span<const double> point, double step = 1e-5,
                                  double kink_tolerance = 1e-4);

}  // namespace pcct
