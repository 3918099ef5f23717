// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "kombo/nn/ops.hpp"
#include "kombo/nn/rng.hpp"

namespace kombo::nn {

struct Init {
  enum class Kind { TruncatedNormal, Zeros, Constant, Uniform } kind = Kind::Zeros;
  double value = 0.0;  // sd for TruncatedNormal, fill value for Constant, bound for Uniform

  static Init normal(double sd = 0.02) { return {Kind::TruncatedNormal, sd}; }
  static Init zeros() { return {Kind::Zeros, 0.0}; }
  static Init constant(double v) { return {Kind::Constant, v}; }
  static Init uniform(double bound) { return {Kind::Uniform, bound}; }
};

template <typename T>
struct Parameter {
  std::string name;
  Var<T> var;
  Init init;
  bool decay = false;  // AdamW weight decay applies
};

/// Owns every trainable tensor of a model, in registration order.
template <typename T>
class ParameterStore {
 public:
  /// Registers and initializes a parameter. Duplicate names throw ConfigError.
  Var<T> add(const std::string& name, const Shape& shape, Init init, bool decay, Rng& rng);

  std::vector<Parameter<T>>& params() { return params_; }
  const std::vector<Parameter<T>>& params() const { return params_; }
  const Parameter<T>* find(const std::string& name) const;
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<Parameter<T>> params_;
  std::map<std::string, std::size_t> index_;
};

template <typename T>
struct Linear {
  Var<T> w;  // [in, out]
  Var<T> b;  // [out]

  static Linear make(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  Var<T> operator()(const Var<T>& x) const { return affine(x, w, b); }
};

template <typename T>
struct LayerNorm {
  Var<T> gamma;
  Var<T> beta;

  static LayerNorm make(ParameterStore<T>& store, const std::string& name, std::size_t d, Rng& rng);
  Var<T> operator()(const Var<T>& x) const { return layer_norm(x, gamma, beta); }
};

/// Pre-norm block: x + Attn(LN(x)), then + FFN(LN(.)) with a 4D GELU hidden layer.
template <typename T>
struct TransformerBlock {
  LayerNorm<T> ln_attn;
  Linear<T> query, key, value, out;
  LayerNorm<T> ln_ffn;
  Linear<T> ffn_in, ffn_out;
  std::size_t heads = 1;

  static TransformerBlock make(ParameterStore<T>& store, const std::string& name, std::size_t d, std::size_t heads,
                               Rng& rng);
  Var<T> operator()(const Var<T>& x, const std::vector<std::uint8_t>& key_mask = {},
                    std::vector<T>* probs_out = nullptr) const;
};

template <typename T>
struct GruLayer {
  Var<T> w_ih, w_hh, b_ih, b_hh;

  static GruLayer make(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t hidden,
                       Rng& rng);
  Var<T> operator()(const Var<T>& x) const { return gru(x, w_ih, w_hh, b_ih, b_hh); }
};

extern template class ParameterStore<float>;
extern template class ParameterStore<double>;
extern template struct Linear<float>;
extern template struct Linear<double>;
extern template struct LayerNorm<float>;
extern template struct LayerNorm<double>;
extern template struct TransformerBlock<float>;
extern template struct TransformerBlock<double>;
extern template struct GruLayer<float>;
extern template struct GruLayer<double>;

}  // namespace kombo::nn
