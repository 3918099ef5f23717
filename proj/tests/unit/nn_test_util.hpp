// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "kombo/nn/grad_check.hpp"
#include "kombo/nn/ops.hpp"
#include "kombo/nn/rng.hpp"

namespace kombo::testing {

inline nn::Var<double> random_leaf(const nn::Shape& shape, nn::Rng& rng, double sd = 1.0) {
  nn::Tensor<double> t(shape);
  for (auto& v : t.values()) v = sd * rng.normal();
  return nn::Var<double>::leaf(std::move(t), true);
}

inline nn::Tensor<double> random_tensor(const nn::Shape& shape, nn::Rng& rng) {
  nn::Tensor<double> t(shape);
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

/// Scalar probe of an op output: sum(y * w) for a fixed random w.
inline std::function<nn::Var<double>()> probe(std::function<nn::Var<double>()> f, std::uint64_t seed = 99) {
  auto weights = std::make_shared<nn::Tensor<double>>();
  return [f = std::move(f), weights, seed]() {
    nn::Var<double> y = f();
    if (weights->shape() != y.shape()) {
      nn::Rng rng(seed);
      *weights = random_tensor(y.shape(), rng);
    }
    return nn::weighted_sum(y, *weights);
  };
}

}  // namespace kombo::testing
