// SPDX-License-Identifier: Apache-2.0
#include "kombo/nn/optimizer.hpp"

#include <cmath>

#include "kombo/error.hpp"

namespace kombo::nn {

double scheduled_lr(const AdamWConfig& cfg, std::size_t step) {
  if (cfg.warmup_steps == 0 || step >= cfg.warmup_steps) return cfg.lr;
  return cfg.lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
}

template <typename T>
AdamW<T>::AdamW(AdamWConfig cfg) : cfg_(cfg) {
  if (cfg_.lr < 0) throw Error(ErrorKind::ConfigError, "learning rate must be non-negative");
  if (cfg_.weight_decay < 0) throw Error(ErrorKind::ConfigError, "weight decay must be non-negative");
  if (cfg_.beta1 < 0 || cfg_.beta1 >= 1 || cfg_.beta2 < 0 || cfg_.beta2 >= 1) {
    throw Error(ErrorKind::ConfigError, "betas must lie in [0, 1)");
  }
}

template <typename T>
double AdamW<T>::step(ParameterStore<T>& store) {
  auto& params = store.params();
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.var.value().size(), T(0));
      v_.emplace_back(p.var.value().size(), T(0));
    }
  }
  if (m_.size() != params.size()) throw Error(ErrorKind::ConfigError, "parameter set changed between steps");
  ++t_;
  const double lr = scheduled_lr(cfg_, t_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    Tensor<T>& w = p.var.mutable_value();
    const Tensor<T>& g = p.var.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    const double decay = p.decay ? lr * cfg_.weight_decay : 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      m[i] = static_cast<T>(cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi);
      v[i] = static_cast<T>(cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi);
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      const double wi = static_cast<double>(w[i]);
      w[i] = static_cast<T>(wi - lr * mhat / (std::sqrt(vhat) + cfg_.eps) - decay * wi);
    }
  }
  return lr;
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace kombo::nn
