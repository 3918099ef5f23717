// SPDX-License-Identifier: Apache-2.0
#include "kombo/nn/layers.hpp"

#include <cmath>

#include "kombo/error.hpp"

namespace kombo::nn {

template <typename T>
Var<T> ParameterStore<T>::add(const std::string& name, const Shape& shape, Init init, bool decay, Rng& rng) {
  if (index_.count(name)) throw Error(ErrorKind::ConfigError, "duplicate parameter name " + name);
  Tensor<T> value(shape);
  switch (init.kind) {
    case Init::Kind::TruncatedNormal:
      for (auto& v : value.values()) v = static_cast<T>(rng.truncated_normal(init.value));
      break;
    case Init::Kind::Constant:
      value.fill(static_cast<T>(init.value));
      break;
    case Init::Kind::Uniform:
      for (auto& v : value.values()) v = static_cast<T>(init.value * (2.0 * rng.uniform() - 1.0));
      break;
    case Init::Kind::Zeros:
      break;
  }
  index_[name] = params_.size();
  params_.push_back({name, Var<T>::leaf(std::move(value), true), init, decay});
  return params_.back().var;
}

template <typename T>
const Parameter<T>* ParameterStore<T>::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename T>
std::size_t ParameterStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.var.value().size();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
}

template <typename T>
Linear<T> Linear<T>::make(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out,
                          Rng& rng) {
  return {store.add(name + ".weight", {in, out}, Init::normal(), true, rng),
          store.add(name + ".bias", {out}, Init::zeros(), false, rng)};
}

template <typename T>
LayerNorm<T> LayerNorm<T>::make(ParameterStore<T>& store, const std::string& name, std::size_t d, Rng& rng) {
  return {store.add(name + ".gamma", {d}, Init::constant(1.0), false, rng),
          store.add(name + ".beta", {d}, Init::zeros(), false, rng)};
}

template <typename T>
TransformerBlock<T> TransformerBlock<T>::make(ParameterStore<T>& store, const std::string& name, std::size_t d,
                                              std::size_t heads, Rng& rng) {
  if (heads == 0 || d % heads != 0) {
    throw Error(ErrorKind::ConfigError,
                "width " + std::to_string(d) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  TransformerBlock blk;
  blk.ln_attn = LayerNorm<T>::make(store, name + ".ln_attn", d, rng);
  blk.query = Linear<T>::make(store, name + ".query", d, d, rng);
  blk.key = Linear<T>::make(store, name + ".key", d, d, rng);
  blk.value = Linear<T>::make(store, name + ".value", d, d, rng);
  blk.out = Linear<T>::make(store, name + ".out", d, d, rng);
  blk.ln_ffn = LayerNorm<T>::make(store, name + ".ln_ffn", d, rng);
  blk.ffn_in = Linear<T>::make(store, name + ".ffn_in", d, 4 * d, rng);
  blk.ffn_out = Linear<T>::make(store, name + ".ffn_out", 4 * d, d, rng);
  blk.heads = heads;
  return blk;
}

template <typename T>
Var<T> TransformerBlock<T>::operator()(const Var<T>& x, const std::vector<std::uint8_t>& key_mask,
                                       std::vector<T>* probs_out) const {
  const Var<T> a = ln_attn(x);
  const Var<T> ctx = multihead_attention(query(a), key(a), value(a), heads, key_mask, probs_out);
  const Var<T> h = add(x, out(ctx));
  return add(h, ffn_out(gelu(ffn_in(ln_ffn(h)))));
}

template <typename T>
GruLayer<T> GruLayer<T>::make(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t hidden,
                              Rng& rng) {
  // Recurrent weights use the usual U(-1/sqrt(H), 1/sqrt(H)). With the 0.02
  // normal init of the other matrices each GRU shrinks its input by an order
  // of magnitude, and the stacked restoration cells barely train.
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  return {store.add(name + ".w_ih", {in, 3 * hidden}, Init::uniform(bound), true, rng),
          store.add(name + ".w_hh", {hidden, 3 * hidden}, Init::uniform(bound), true, rng),
          store.add(name + ".b_ih", {3 * hidden}, Init::zeros(), false, rng),
          store.add(name + ".b_hh", {3 * hidden}, Init::zeros(), false, rng)};
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template struct Linear<float>;
template struct Linear<double>;
template struct LayerNorm<float>;
template struct LayerNorm<double>;
template struct TransformerBlock<float>;
template struct TransformerBlock<double>;
template struct GruLayer<float>;
template struct GruLayer<double>;

}  // namespace kombo::nn
