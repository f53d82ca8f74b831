#pragma once

// Central finite-difference oracle used by the gradient tests. Independent
// of the autograd path: it only re-runs the caller's forward function.

#include <cmath>
#include <vector>

#include "iest/tensor.hpp"

namespace iest::testing {

// `forward` must be a pure function of the current parameter values.
// Call after analytic gradients have been accumulated into param->grad.
template <class ForwardFn>
double max_relative_grad_error(const std::vector<Tensor<double>*>& params,
                               ForwardFn forward, double eps = 1e-5) {
  double worst = 0.0;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->data.size(); ++i) {
      const double saved = p->data[i];
      p->data[i] = saved + eps;
      const double up = forward();
      p->data[i] = saved - eps;
      const double down = forward();
      p->data[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[i];
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
  }
  return worst;
}

}  // namespace iest::testing
