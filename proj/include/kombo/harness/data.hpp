// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "kombo/model/model.hpp"
#include "kombo/nn/rng.hpp"
#include "kombo/objectives/masking.hpp"
#include "kombo/objectives/nsp.hpp"
#include "kombo/tokenizer/tokenizer.hpp"

namespace kombo::harness {

/// Endless stream over 0..n-1, one epoch after another, drawn through a
/// fixed-capacity shuffle buffer. The order depends only on (n, capacity, seed).
class ShuffleBuffer {
 public:
  ShuffleBuffer(std::size_t n, std::size_t capacity, std::uint64_t seed);
  std::size_t next();
  /// Epoch of the most recently fed element.
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t feed();

  std::size_t n_;
  nn::Rng rng_;
  std::vector<std::size_t> buffer_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

struct Batch {
  model::IdBatch input;         // masked ids, [batch, seq_len]
  std::vector<int> originals;   // ids before masking
  std::vector<int> mlm_targets; // objectives::kIgnoreId where not masked
  std::vector<int> nsp_labels;
};

/// Padded, masked sentence pairs for pretraining. Pairs are opened by anchor
/// sentences taken from a shuffle buffer; every example is exactly seq_len
/// ids, cut at character boundaries and right-padded with PAD spans.
class BatchStream {
 public:
  BatchStream(const objectives::Corpus& corpus, const tokenizer::Tokenizer& tok,
              const objectives::ObjectiveConfig& objective, std::size_t seq_len, std::size_t batch_size,
              std::size_t shuffle_buffer, std::uint64_t seed);

  Batch next();
  bool positive_only() const { return sampler_.positive_only(); }

 private:
  const tokenizer::Tokenizer* tok_;
  objectives::ObjectiveConfig objective_;
  std::size_t seq_len_, batch_size_;
  objectives::NspSampler sampler_;
  ShuffleBuffer order_;
  nn::Rng rng_;
};

}  // namespace kombo::harness
