// SPDX-License-Identifier: Apache-2.0
#include "kombo/model/model.hpp"

#include "kombo/error.hpp"
#include "kombo/tokenizer/vocab.hpp"

namespace kombo::model {

using nn::Init;
using nn::Var;

template <typename T>
typename KomboModel<T>::Cell KomboModel<T>::make_cell(const std::string& name, nn::Rng& rng) {
  Cell c;
  if (cfg_.restore.cell == RestoreCell::Gru) {
    c.gru = nn::GruLayer<T>::make(store_, name, cfg_.d_model, cfg_.d_model, rng);
  } else {
    c.linear = nn::Linear<T>::make(store_, name, cfg_.d_model, cfg_.d_model, rng);
  }
  return c;
}

template <typename T>
KomboModel<T>::KomboModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  nn::Rng rng(seed);
  const std::size_t d = cfg_.d_model;
  const auto tpc = static_cast<std::size_t>(cfg_.scheme.tokens_per_char);
  token_table_ = store_.add("embed.token", {cfg_.vocab_size, d}, Init::normal(), true, rng);
  position_table_ = store_.add("embed.position", {cfg_.max_len, d}, Init::normal(), true, rng);
  if (!cfg_.ablations.no_contextualization) {
    for (std::size_t i = 0; i < cfg_.local_layers; ++i) {
      local_blocks_.push_back(nn::TransformerBlock<T>::make(store_, "context.block" + std::to_string(i), d, cfg_.heads, rng));
    }
    context_gru_ = nn::GruLayer<T>::make(store_, "context.gru", d, d, rng);
    if (cfg_.bidirectional_gru) context_gru_reverse_ = nn::GruLayer<T>::make(store_, "context.gru_reverse", d, d, rng);
  }
  const auto& ab = cfg_.ablations;
  if (!ab.no_merge) {
    if (ab.alt_downsample == Downsample::AttentionPool) {
      pool_query_ = store_.add("pool.query", {d}, Init::normal(), false, rng);
    } else if (ab.alt_downsample == Downsample::LinearPool) {
      pool_linear_ = nn::Linear<T>::make(store_, "pool.linear", tpc * d, d, rng);
    } else if (!ab.no_jongsung_addition) {
      for (std::size_t k = 0; k < cfg_.merge.kernels.size(); ++k) {
        const std::size_t w = cfg_.merge.kernels[k].width;
        // Every tap starts at 1/(2w), so a fresh kernel averages its window.
        kernels_.push_back(store_.add("merge.kernel" + std::to_string(k), {2 * w, d},
                                      Init::constant(1.0 / static_cast<double>(2 * w)), true, rng));
        kernel_biases_.push_back(store_.add("merge.bias" + std::to_string(k), {d}, Init::zeros(), false, rng));
      }
    }
  }
  for (std::size_t i = 0; i < cfg_.layers; ++i) {
    stack_blocks_.push_back(nn::TransformerBlock<T>::make(store_, "stack.block" + std::to_string(i), d, cfg_.heads, rng));
  }
  if (cfg_.layers > 0) stack_ln_ = nn::LayerNorm<T>::make(store_, "stack.ln_final", d, rng);
  if (!ab.no_merge) {
    if (cfg_.restore.hierarchical) {
      stage1_ = make_cell("restore.stage1", rng);
      stage2_ = make_cell("restore.stage2", rng);
    } else {
      single_ = make_cell("restore.cell", rng);
    }
  }
  mlm_ln_ = nn::LayerNorm<T>::make(store_, "head.ln", d, rng);
  mlm_head_ = nn::Linear<T>::make(store_, "head.mlm", d, cfg_.vocab_size, rng);
  nsp_head_ = nn::Linear<T>::make(store_, "head.nsp", d, cfg_.nsp_classes, rng);
}

template <typename T>
Var<T> KomboModel<T>::embed(const IdBatch& x) const {
  if (x.length > cfg_.max_len) {
    throw Error(ErrorKind::ShapeError,
                "sequence of " + std::to_string(x.length) + " exceeds max_len " + std::to_string(cfg_.max_len));
  }
  return nn::add_positional(nn::embedding(x.ids, x.batch, x.length, token_table_), position_table_);
}

template <typename T>
Var<T> KomboModel<T>::contextualize(const Var<T>& e, const std::vector<std::uint8_t>& key_mask) const {
  if (cfg_.ablations.no_contextualization) return e;
  Var<T> x = e;
  for (const auto& blk : local_blocks_) x = blk(x, key_mask);
  Var<T> h = (*context_gru_)(x);
  if (context_gru_reverse_) h = nn::add(h, nn::reverse_positions((*context_gru_reverse_)(nn::reverse_positions(x))));
  return h;
}

template <typename T>
MergeOutput<T> KomboModel<T>::merge_characters(const Var<T>& h) const {
  const auto& s = cfg_.scheme;
  const auto tpc = static_cast<std::size_t>(s.tokens_per_char);
  MergeOutput<T> out;
  if (cfg_.ablations.no_merge) {
    out.h_c = h;
    return out;
  }
  if (h.shape().size() != 3 || h.shape()[1] % tpc != 0) {
    throw Error(ErrorKind::AlignmentError, "subcharacter length " + nn::shape_string(h.shape()) +
                                               " is not a multiple of " + std::to_string(tpc));
  }
  if (cfg_.ablations.alt_downsample != Downsample::None) {
    out.h_c = alt_downsample(h);
    return out;
  }
  const Var<T> h_i = nn::group_sum(h, tpc, static_cast<std::size_t>(s.cho_begin()), static_cast<std::size_t>(s.cho_slots));
  const Var<T> h_v = nn::group_sum(h, tpc, static_cast<std::size_t>(s.jung_begin()), static_cast<std::size_t>(s.jung_slots));
  out.h_f = nn::group_sum(h, tpc, static_cast<std::size_t>(s.jong_begin()), static_cast<std::size_t>(s.jong_slots));
  out.h_iv = nn::add(h_i, h_v);
  out.h_r = nn::interleave(out.h_iv, out.h_f);
  out.h_c = cfg_.ablations.no_jongsung_addition ? nn::add(out.h_iv, out.h_f)
                                                : nn::conv_fuse(out.h_iv, out.h_f, kernels_, kernel_biases_);
  return out;
}

template <typename T>
Var<T> KomboModel<T>::alt_downsample(const Var<T>& h) const {
  const auto tpc = static_cast<std::size_t>(cfg_.scheme.tokens_per_char);
  switch (cfg_.ablations.alt_downsample) {
    case Downsample::AttentionPool:
      return nn::group_attention_pool(h, pool_query_, tpc);
    case Downsample::LinearPool: {
      const std::size_t b = h.shape()[0], n = h.shape()[1], d = h.shape()[2];
      return (*pool_linear_)(nn::reshape(h, {b, n / tpc, tpc * d}));
    }
    case Downsample::None:
      break;
  }
  throw Error(ErrorKind::ConfigError, "no alternative downsampler configured");
}

template <typename T>
Var<T> KomboModel<T>::encode_stack(const Var<T>& h_c, const std::vector<std::uint8_t>& key_mask) const {
  Var<T> x = h_c;
  for (const auto& blk : stack_blocks_) x = blk(x, key_mask);
  return stack_ln_ ? (*stack_ln_)(x) : x;
}

template <typename T>
RestoreOutput<T> KomboModel<T>::restore(const Var<T>& h_c_prime, const MergeOutput<T>& merged,
                                        const Var<T>& h) const {
  RestoreOutput<T> out;
  if (cfg_.ablations.no_merge) {
    out.h_prime = h_c_prime;
    return out;
  }
  const auto& s = cfg_.scheme;
  if (cfg_.restore.hierarchical) {
    if (!merged.h_r.defined()) throw Error(ErrorKind::ConfigError, "hierarchical restoration needs h_R");
    Var<T> x = nn::repeat_rows(h_c_prime, {2});
    if (cfg_.restore.residual) x = nn::add(x, merged.h_r);
    out.h_r_prime = (*stage1_)(x);
    Var<T> y = nn::repeat_rows(out.h_r_prime, {static_cast<std::size_t>(s.cho_slots + s.jung_slots),
                                                static_cast<std::size_t>(s.jong_slots)});
    if (cfg_.restore.residual) y = nn::add(y, h);
    out.h_prime = (*stage2_)(y);
  } else {
    Var<T> y = nn::repeat_rows(h_c_prime, {static_cast<std::size_t>(s.tokens_per_char)});
    if (cfg_.restore.residual) y = nn::add(y, h);
    out.h_prime = (*single_)(y);
  }
  return out;
}

template <typename T>
std::vector<std::uint8_t> KomboModel<T>::position_mask(const IdBatch& x) const {
  const int pad = tokenizer::SpecialIds{}.pad;
  std::vector<std::uint8_t> mask(x.ids.size());
  for (std::size_t i = 0; i < x.ids.size(); ++i) mask[i] = x.ids[i] != pad;
  return mask;
}

template <typename T>
std::vector<std::uint8_t> KomboModel<T>::character_mask(const IdBatch& x) const {
  const int pad = tokenizer::SpecialIds{}.pad;
  const auto tpc = static_cast<std::size_t>(cfg_.scheme.tokens_per_char);
  std::vector<std::uint8_t> mask(x.ids.size() / tpc);
  for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = x.ids[k * tpc] != pad;
  return mask;
}

template <typename T>
ForwardOutput<T> KomboModel<T>::forward(const IdBatch& x) const {
  if (x.ids.size() != x.batch * x.length) throw Error(ErrorKind::ShapeError, "ids do not match batch x length");
  const auto sub_mask = position_mask(x);
  ForwardOutput<T> out;
  out.e = embed(x);
  out.h = contextualize(out.e, sub_mask);
  out.merge = merge_characters(out.h);
  out.h_c_prime = encode_stack(out.merge.h_c, cfg_.ablations.no_merge ? sub_mask : character_mask(x));
  out.restore = restore(out.h_c_prime, out.merge, out.h);
  out.mlm_logits = mlm_head_(mlm_ln_(out.restore.h_prime));
  out.nsp_logits = nsp_head_(nn::select_position(out.h_c_prime, 0));
  return out;
}

template class KomboModel<float>;
template class KomboModel<double>;

}  // namespace kombo::model
