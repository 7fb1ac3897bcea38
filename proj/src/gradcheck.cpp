#include "pcct/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcct/error.hpp"

namespace pcct {

GradCheckResult finite_diff_check(const std::function<Tensor(const Tensor&)>& loss_fn,
                                  std::span<const double> point, double step, double kink_tolerance) {
  require(step > 0.0, ErrorKind::kContract, "finite_diff_check: step must be positive");
  GradCheckResult result;

  std::vector<double> x(point.begin(), point.end());
  Tensor input = Tensor::vector(x, true);
  reset_kink_hits();
  Tensor loss = loss_fn(input);
  const bool exact_kink = kink_hits() > 0;
  const double f0 = loss.item();
  std::vector<double> analytic(x.size(), 0.0);
  if (loss.requires_grad()) {
    loss.backward();
    auto g = input.grad();
    analytic.assign(g.begin(), g.end());
  }

  NoGradGuard guard;
  auto eval = [&](const std::vector<double>& at) { return loss_fn(Tensor::vector(at)).item(); };
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fp = eval(xp), fm = eval(xm);
    const double central = (fp - fm) / (2.0 * step);
    const double forward = (fp - f0) / step;
    const double backward = (f0 - fm) / step;
    if (!result.kink && std::abs(forward - backward) > kink_tolerance * std::max(1.0, std::abs(central))) {
      result.kink = true;
      result.kink_coordinate = i;
    }
    const double err = std::abs(analytic[i] - central) / std::max(1.0, std::abs(central));
    result.max_rel_error = std::max(result.max_rel_error, err);
  }
  if (exact_kink) result.kink = true;
  return result;
}

}  // namespace pcct
