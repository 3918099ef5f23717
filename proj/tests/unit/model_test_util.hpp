// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "kombo/model/model.hpp"
#include "kombo/nn/grad_check.hpp"
#include "kombo/nn/ops.hpp"
#include "kombo/tokenizer/tokenizer.hpp"

namespace kombo::testing {

inline model::ModelConfig micro_config(hangul::SchemeKind kind, std::size_t vocab_size) {
  model::ModelConfig c;
  c.d_model = 8;
  c.layers = 1;
  c.local_layers = 1;
  c.heads = 2;
  c.scheme = hangul::UnitScheme::of(kind);
  c.max_len = static_cast<std::size_t>(c.scheme.tokens_per_char) * 8;
  c.vocab_size = vocab_size;
  return c;
}

/// Spreads parameters away from their near-zero init so that gradient checks
/// exercise every nonlinearity.
template <typename T>
void jitter(model::KomboModel<T>& m, std::uint64_t seed, double sd = 0.3) {
  nn::Rng rng(seed);
  for (auto& p : m.params().params()) {
    for (auto& v : p.var.mutable_value().values()) v += static_cast<T>(sd * rng.normal());
  }
}

inline model::IdBatch batch_of(const tokenizer::TokenSequence& seq) {
  return {seq.ids, 1, seq.ids.size()};
}

/// MLM over every position plus NSP on label 1.
inline nn::Var<double> pretraining_loss(const model::KomboModel<double>& m, const model::IdBatch& x) {
  const auto out = m.forward(x);
  std::vector<int> targets = x.ids;
  std::vector<int> labels(x.batch, 1);
  return nn::add(nn::cross_entropy(out.mlm_logits, targets, -100).loss,
                 nn::cross_entropy(out.nsp_logits, labels, -100).loss);
}

inline double model_grad_error(model::KomboModel<double>& m, const model::IdBatch& x,
                               std::size_t coords_per_tensor = 0) {
  std::vector<nn::NamedVar> inputs;
  for (auto& p : m.params().params()) inputs.push_back({p.name, p.var});
  nn::GradCheckOptions opt;
  opt.max_coords_per_tensor = coords_per_tensor;
  return nn::grad_check([&] { return pretraining_loss(m, x); }, inputs, opt).max_rel_error;
}

}  // namespace kombo::testing
