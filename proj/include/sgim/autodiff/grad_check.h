#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "sgim/autodiff/tensor.h"

namespace sgim::ad {

template <typename T>
using ScalarFunction = std::function<BasicTensor<T>(const BasicTensor<T>&)>;

// Compares the reverse-mode gradient of f at x with central differences of
// step h. Returns max_i |analytic_i - numeric_i| / max(1, |analytic_i|, |numeric_i|).
template <typename T>
double grad_check(const ScalarFunction<T>& f, const BasicTensor<T>& x, double h = 1e-3) {
  if (!(h > 0.0)) throw ContractError("grad_check: step must be positive");
  BasicTensor<T> leaf = x.detach(/*requires_grad=*/true);
  BasicTensor<T> y = f(leaf);
  if (y.size() != 1) {
    throw ContractError("grad_check: function must be scalar-valued, got shape " +
                        shape_string(y.shape()));
  }
  std::vector<T> analytic(leaf.size(), T(0));
  if (y.requires_grad()) {
    backward(y);
    if (leaf.has_grad()) analytic.assign(leaf.grad().begin(), leaf.grad().end());
  }

  double worst = 0.0;
  BasicTensor<T> probe = x.detach();
  auto values = probe.mutable_data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const T original = values[i];
    values[i] = static_cast<T>(original + h);
    const double up = f(probe).item();
    values[i] = static_cast<T>(original - h);
    const double down = f(probe).item();
    values[i] = original;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[i];
    const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace sgim::ad
