// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "kombo/nn/layers.hpp"

namespace kombo::nn {

struct AdamWConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::size_t warmup_steps = 0;
};

/// Linear warmup to cfg.lr over warmup_steps, then constant. `step` is 1-based.
double scheduled_lr(const AdamWConfig& cfg, std::size_t step);

/// AdamW with decoupled weight decay, applied to parameters flagged `decay`.
template <typename T>
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg);

  /// One update using the grads currently stored on the parameters. Returns
  /// the learning rate that was used.
  double step(ParameterStore<T>& store);
  std::size_t steps_taken() const { return t_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  AdamWConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace kombo::nn
