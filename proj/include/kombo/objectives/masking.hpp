// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "kombo/nn/rng.hpp"
#include "kombo/tokenizer/tokenizer.hpp"

namespace kombo::objectives {

/// Target value for positions that carry no MLM loss.
inline constexpr int kIgnoreId = -100;

enum class MaskStrategy { SpanSubchar, TokenLevel };
enum class MaskAction { Mask, Random, Keep };

struct ObjectiveConfig {
  double mask_ratio = 0.15;
  double p_mask = 0.8;
  double p_random = 0.1;
  double p_keep = 0.1;
  MaskStrategy strategy = MaskStrategy::SpanSubchar;
  double nsp_negative_rate = 0.5;

  void validate() const;
  nlohmann::json to_json() const;
  static ObjectiveConfig from_json(const nlohmann::json& j);
  friend bool operator==(const ObjectiveConfig&, const ObjectiveConfig&) = default;
};

struct MaskingPlan {
  std::size_t seq_len = 0;
  /// Span indices whose every slot is masked (SpanSubchar only).
  std::vector<std::size_t> masked_chars;
  /// Masked id positions, ascending, with one action and one replacement id
  /// (meaningful for Random only) per position.
  std::vector<std::size_t> positions;
  std::vector<MaskAction> actions;
  std::vector<int> replacements;

  bool empty() const { return positions.empty(); }
};

/// Whole characters are chosen without replacement and every slot of a chosen
/// character gets the same action. Special spans are never chosen. Throws
/// EmptyPlan when the sequence has no ordinary character.
MaskingPlan plan_span_subchar_mask(const tokenizer::TokenSequence& seq, const tokenizer::Vocab& vocab,
                                   const ObjectiveConfig& cfg, nn::Rng& rng);

/// Individual positions of ordinary characters, chosen independently of spans.
MaskingPlan plan_token_mask(const tokenizer::TokenSequence& seq, const tokenizer::Vocab& vocab,
                            const ObjectiveConfig& cfg, nn::Rng& rng);

MaskingPlan plan_mask(const tokenizer::TokenSequence& seq, const tokenizer::Vocab& vocab, const ObjectiveConfig& cfg,
                      nn::Rng& rng);

struct MaskedSequence {
  std::vector<int> ids;
  std::vector<int> targets;  // original id where masked, kIgnoreId elsewhere
};

/// Throws AlignmentError if the plan was made for a different sequence length.
MaskedSequence apply_mask(const std::vector<int>& ids, const MaskingPlan& plan, const tokenizer::Vocab& vocab);

}  // namespace kombo::objectives
