#pragma once

// Adam with bias correction. Defaults are the canonical ones
// (lr 1e-3, beta1 0.9, beta2 0.999, eps 1e-8).

#include <cmath>
#include <stdexcept>

#include "kfx/tensor.hpp"

namespace kfx {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  Tensor<T> m;  // first moment
  Tensor<T> v;  // second moment, elementwise >= 0
  long t = 0;   // completed steps
  AdamConfig cfg;

  AdamState() = default;
  AdamState(const std::vector<int>& shape, AdamConfig c = {})
      : m(shape), v(shape), cfg(c) {}
};

// One update, in place:
//   m <- b1*m + (1-b1)*g        v <- b2*v + (1-b2)*g^2
//   mhat = m/(1-b1^t)           vhat = v/(1-b2^t)
//   theta <- theta - lr * mhat / (sqrt(vhat) + eps)
template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, AdamState<T>& state) {
  if (!param.same_shape(grad) || !param.same_shape(state.m))
    throw std::invalid_argument("adam_step: shape mismatch");
  state.t += 1;
  const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  const double lr = state.cfg.lr, eps = state.cfg.epsilon;
  T* th = param.data();
  T* m = state.m.data();
  T* v = state.v.data();
  const T* g = grad.data();
  const std::size_t n = param.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = static_cast<double>(g[i]);
    const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * gi;
    const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * gi * gi;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double mhat = mi / c1;
    const double vhat = vi / c2;
    th[i] = static_cast<T>(static_cast<double>(th[i]) -
                           lr * mhat / (std::sqrt(vhat) + eps));
  }
}

}  // namespace kfx
