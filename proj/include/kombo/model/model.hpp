// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kombo/model/config.hpp"
#include "kombo/nn/layers.hpp"

namespace kombo::model {

/// Row-major batch of id sequences, all of the same length.
struct IdBatch {
  std::vector<int> ids;
  std::size_t batch = 0;
  std::size_t length = 0;
};

template <typename T>
struct MergeOutput {
  nn::Var<T> h_c;   // [B, M, D]
  nn::Var<T> h_iv;  // [B, M, D]; undefined for alternative downsamplers
  nn::Var<T> h_f;   // [B, M, D]
  nn::Var<T> h_r;   // [B, 2M, D], rows alternate h_iv and h_f per character
};

template <typename T>
struct RestoreOutput {
  nn::Var<T> h_r_prime;  // [B, 2M, D]; undefined without hierarchical restoration
  nn::Var<T> h_prime;    // [B, N, D]
};

template <typename T>
struct ForwardOutput {
  nn::Var<T> e;
  nn::Var<T> h;
  MergeOutput<T> merge;
  nn::Var<T> h_c_prime;  // [B, M, D]
  RestoreOutput<T> restore;
  nn::Var<T> mlm_logits;  // [B, N, V]
  nn::Var<T> nsp_logits;  // [B, classes]
};

template <typename T>
class KomboModel {
 public:
  KomboModel(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  nn::ParameterStore<T>& params() { return store_; }
  const nn::ParameterStore<T>& params() const { return store_; }

  nn::Var<T> embed(const IdBatch& x) const;
  nn::Var<T> contextualize(const nn::Var<T>& e, const std::vector<std::uint8_t>& key_mask = {}) const;
  MergeOutput<T> merge_characters(const nn::Var<T>& h) const;
  nn::Var<T> alt_downsample(const nn::Var<T>& h) const;
  nn::Var<T> encode_stack(const nn::Var<T>& h_c, const std::vector<std::uint8_t>& key_mask = {}) const;
  RestoreOutput<T> restore(const nn::Var<T>& h_c_prime, const MergeOutput<T>& merged, const nn::Var<T>& h) const;
  ForwardOutput<T> forward(const IdBatch& x) const;

  /// Subcharacter-level key mask: position is attendable unless its id is PAD.
  std::vector<std::uint8_t> position_mask(const IdBatch& x) const;
  /// Character-level key mask: character is attendable unless its span starts with PAD.
  std::vector<std::uint8_t> character_mask(const IdBatch& x) const;

 private:
  struct Cell {
    std::optional<nn::Linear<T>> linear;
    std::optional<nn::GruLayer<T>> gru;
    nn::Var<T> operator()(const nn::Var<T>& x) const { return gru ? (*gru)(x) : (*linear)(x); }
  };
  Cell make_cell(const std::string& name, nn::Rng& rng);

  ModelConfig cfg_;
  nn::ParameterStore<T> store_;
  nn::Var<T> token_table_, position_table_;
  std::vector<nn::TransformerBlock<T>> local_blocks_;
  std::optional<nn::GruLayer<T>> context_gru_, context_gru_reverse_;
  std::vector<nn::Var<T>> kernels_, kernel_biases_;
  nn::Var<T> pool_query_;
  std::optional<nn::Linear<T>> pool_linear_;
  std::vector<nn::TransformerBlock<T>> stack_blocks_;
  std::optional<nn::LayerNorm<T>> stack_ln_;
  std::optional<Cell> stage1_, stage2_, single_;
  nn::LayerNorm<T> mlm_ln_;
  nn::Linear<T> mlm_head_, nsp_head_;
};

extern template class KomboModel<float>;
extern template class KomboModel<double>;

}  // namespace kombo::model
