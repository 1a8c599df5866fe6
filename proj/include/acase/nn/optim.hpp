#pragma once

#include <cmath>

#include "acase/nn/model.hpp"

namespace acase::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Decoupled weight decay (p -= lr * wd * p), then the bias-corrected Adam
// update. Increments the step counter and zeroes gradients.
inline void adam_step(ModelState& m, double lr, double weight_decay, const AdamConfig& cfg = {}) {
  auto& st = m.adam;
  ++st.step;
  const double t = static_cast<double>(st.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < m.params.size(); ++k) {
    Parameter& p = m.params[k];
    Matrix& mk = st.m[k];
    Matrix& vk = st.v[k];
    if (weight_decay != 0.0) p.value *= (1.0 - lr * weight_decay);
    mk = cfg.beta1 * mk + (1.0 - cfg.beta1) * p.grad;
    vk = cfg.beta2 * vk + (1.0 - cfg.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (mk.array() / c1) / ((vk.array() / c2).sqrt() + cfg.eps);
    p.grad.setZero();
  }
}

}  // namespace acase::nn
