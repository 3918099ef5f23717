// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "kombo/nn/autograd.hpp"

namespace kombo::nn {

// Elementwise. Shapes must match exactly.
template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& a, T factor);
template <typename T> Var<T> sigmoid(const Var<T>& x);
template <typename T> Var<T> tanh(const Var<T>& x);
/// Exact (erf) GELU as in BERT.
template <typename T> Var<T> gelu(const Var<T>& x);

/// x[..., K] @ w[K, H] -> [..., H]
template <typename T> Var<T> matmul(const Var<T>& x, const Var<T>& w);
/// x + b broadcast over rows; b has shape {cols}.
template <typename T> Var<T> add_bias(const Var<T>& x, const Var<T>& b);
template <typename T> Var<T> affine(const Var<T>& x, const Var<T>& w, const Var<T>& b);

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps = T(1e-12));

/// Row lookup. `ids` is batch x length, row-major. Throws VocabError for ids
/// outside the table.
template <typename T>
Var<T> embedding(const std::vector<int>& ids, std::size_t batch, std::size_t length, const Var<T>& table);

/// x[B, N, D] + table[0..N)
template <typename T> Var<T> add_positional(const Var<T>& x, const Var<T>& table);

/// Per character k: sum over positions k*stride + begin .. + count - 1.
/// [B, N, D] -> [B, N / stride, D]. count == 0 yields zeros.
template <typename T>
Var<T> group_sum(const Var<T>& x, std::size_t stride, std::size_t begin, std::size_t count);

/// Rows alternate a[0], b[0], a[1], b[1], ... : [B, M, D] x2 -> [B, 2M, D].
template <typename T> Var<T> interleave(const Var<T>& a, const Var<T>& b);

/// Row r of [B, R, D] is emitted pattern[r % pattern.size()] times.
template <typename T> Var<T> repeat_rows(const Var<T>& x, const std::vector<std::size_t>& pattern);

template <typename T> Var<T> reshape(const Var<T>& x, const Shape& shape);
/// [B, N, D] -> [B, D]
template <typename T> Var<T> select_position(const Var<T>& x, std::size_t position);
/// Flips the position axis of [B, N, D].
template <typename T> Var<T> reverse_positions(const Var<T>& x);

/// Scaled dot-product attention over [B, N, D] with D split into `heads`.
/// `key_mask` (B*N, nonzero = attendable) may be empty. When `probs_out` is
/// given it receives the B x heads x N x N weights.
template <typename T>
Var<T> multihead_attention(const Var<T>& q, const Var<T>& k, const Var<T>& v, std::size_t heads,
                           const std::vector<std::uint8_t>& key_mask = {},
                           std::vector<T>* probs_out = nullptr);

/// Gated recurrent unit over [B, N, Din], gate blocks ordered reset, update,
/// candidate: w_ih [Din, 3H], w_hh [H, 3H], b_ih and b_hh [3H]. `h0` is
/// [B, H] or undefined for zeros. Returns every hidden state, [B, N, H].
template <typename T>
Var<T> gru(const Var<T>& x, const Var<T>& w_ih, const Var<T>& w_hh, const Var<T>& b_ih, const Var<T>& b_hh,
           const Var<T>& h0 = {});

/// Depthwise 2 x w convolutions over the two-row grid (top, bottom), stride 1,
/// width-preserving zero padding (left pad (w-1)/2); outputs of all kernels are
/// averaged. Kernel k has weights [2 * w_k, D] (row r * w_k + j) and bias [D].
template <typename T>
Var<T> conv_fuse(const Var<T>& top, const Var<T>& bottom, const std::vector<Var<T>>& kernels,
                 const std::vector<Var<T>>& biases);

/// Per group of `stride` rows, softmax(query . x / sqrt(D)) weighted sum.
template <typename T> Var<T> group_attention_pool(const Var<T>& x, const Var<T>& query, std::size_t stride);

template <typename T>
struct CrossEntropy {
  Var<T> loss;  // shape {1}
  std::size_t counted = 0;
  bool all_ignored = false;
};

/// Mean negative log-likelihood over rows whose target != ignore_id.
template <typename T>
CrossEntropy<T> cross_entropy(const Var<T>& logits, const std::vector<int>& targets, int ignore_id);

template <typename T> Var<T> sum(const Var<T>& x);
/// sum(x * weights) for a constant weight tensor; handy for gradient checks.
template <typename T> Var<T> weighted_sum(const Var<T>& x, const Tensor<T>& weights);

}  // namespace kombo::nn
