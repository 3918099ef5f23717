// SPDX-License-Identifier: Apache-2.0
#include "kombo/harness/data.hpp"

#include "kombo/error.hpp"

namespace kombo::harness {

ShuffleBuffer::ShuffleBuffer(std::size_t n, std::size_t capacity, std::uint64_t seed) : n_(n), rng_(seed) {
  if (n == 0) throw Error(ErrorKind::NoData, "nothing to shuffle");
  if (capacity == 0) throw Error(ErrorKind::ConfigError, "shuffle buffer capacity must be positive");
  buffer_.reserve(capacity);
  while (buffer_.size() < capacity) buffer_.push_back(feed());
}

std::size_t ShuffleBuffer::feed() {
  if (cursor_ == n_) {
    cursor_ = 0;
    ++epoch_;
  }
  return cursor_++;
}

std::size_t ShuffleBuffer::next() {
  const std::size_t j = rng_.uniform_index(buffer_.size());
  const std::size_t out = buffer_[j];
  buffer_[j] = feed();
  return out;
}

BatchStream::BatchStream(const objectives::Corpus& corpus, const tokenizer::Tokenizer& tok,
                         const objectives::ObjectiveConfig& objective, std::size_t seq_len, std::size_t batch_size,
                         std::size_t shuffle_buffer, std::uint64_t seed)
    : tok_(&tok),
      objective_(objective),
      seq_len_(seq_len),
      batch_size_(batch_size),
      sampler_(corpus, objective.nsp_negative_rate),
      order_(sampler_.anchor_count(), shuffle_buffer, nn::Rng(seed).split(1).next_u64()),
      rng_(nn::Rng(seed).split(2)) {
  objective_.validate();
  if (seq_len % static_cast<std::size_t>(tok.tokens_per_char()) != 0) {
    throw Error(ErrorKind::ConfigError, "seq_len must be a multiple of tokens_per_char");
  }
}

Batch BatchStream::next() {
  Batch b;
  b.input.batch = batch_size_;
  b.input.length = seq_len_;
  b.input.ids.reserve(batch_size_ * seq_len_);
  b.mlm_targets.reserve(batch_size_ * seq_len_);
  // Pairs whose sentences are both empty carry nothing to mask; after this
  // many in a row the corpus is treated as empty.
  const std::size_t max_skips = 1000 + sampler_.anchor_count();
  std::size_t skips = 0;
  while (b.nsp_labels.size() < batch_size_) {
    const auto pair = sampler_.pair_at(order_.next(), rng_);
    auto seq = tok_->encode_pair(pair.a, pair.b, seq_len_);
    tok_->pad_to(seq, seq_len_);
    objectives::MaskingPlan plan;
    try {
      plan = objectives::plan_mask(seq, tok_->vocab(), objective_, rng_);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyPlan) throw;
      if (++skips > max_skips) throw Error(ErrorKind::NoData, "corpus yields no maskable characters");
      continue;
    }
    const auto masked = objectives::apply_mask(seq.ids, plan, tok_->vocab());
    b.input.ids.insert(b.input.ids.end(), masked.ids.begin(), masked.ids.end());
    b.originals.insert(b.originals.end(), seq.ids.begin(), seq.ids.end());
    b.mlm_targets.insert(b.mlm_targets.end(), masked.targets.begin(), masked.targets.end());
    b.nsp_labels.push_back(pair.label);
  }
  return b;
}

}  // namespace kombo::harness
