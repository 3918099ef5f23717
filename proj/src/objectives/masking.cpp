// SPDX-License-Identifier: Apache-2.0
#include "kombo/objectives/masking.hpp"

#include <cmath>

#include "kombo/error.hpp"

namespace kombo::objectives {
namespace {

void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

MaskAction draw_action(const ObjectiveConfig& cfg, nn::Rng& rng) {
  const double u = rng.uniform();
  if (u < cfg.p_mask) return MaskAction::Mask;
  if (u < cfg.p_mask + cfg.p_random) return MaskAction::Random;
  return MaskAction::Keep;
}

int draw_replacement(const tokenizer::Vocab& vocab, nn::Rng& rng) {
  const std::size_t ordinary = vocab.size() - tokenizer::kSpecialCount;
  if (ordinary == 0) throw Error(ErrorKind::VocabError, "vocabulary has no ordinary symbols");
  return tokenizer::kSpecialCount + static_cast<int>(rng.uniform_index(ordinary));
}

std::size_t masked_count(double ratio, std::size_t units) {
  if (units == 0 || ratio <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(units)));
  return std::min(units, std::max<std::size_t>(k, 1));
}

// Both strategies select "units" (characters or single positions) the same
// way, so at one token per character they consume the generator identically.
MaskingPlan plan_units(const tokenizer::TokenSequence& seq, const tokenizer::Vocab& vocab,
                       const ObjectiveConfig& cfg, nn::Rng& rng, bool whole_spans) {
  cfg.validate();
  std::vector<std::size_t> eligible_spans;
  for (std::size_t s = 0; s < seq.spans.size(); ++s) {
    if (seq.spans[s].kind != tokenizer::SpanKind::Special) eligible_spans.push_back(s);
  }
  if (eligible_spans.empty()) throw Error(ErrorKind::EmptyPlan, "sequence holds only special tokens");

  struct Unit {
    std::size_t start, len, span;
  };
  std::vector<Unit> units;
  for (std::size_t s : eligible_spans) {
    const auto& sp = seq.spans[s];
    if (whole_spans) {
      units.push_back({sp.start, sp.len, s});
    } else {
      for (std::size_t i = 0; i < sp.len; ++i) units.push_back({sp.start + i, 1, s});
    }
  }

  MaskingPlan plan;
  plan.seq_len = seq.ids.size();
  const auto chosen = rng.sample_without_replacement(units.size(), masked_count(cfg.mask_ratio, units.size()));
  for (std::size_t u : chosen) {
    const Unit& unit = units[u];
    const MaskAction action = draw_action(cfg, rng);
    if (whole_spans) plan.masked_chars.push_back(unit.span);
    for (std::size_t i = 0; i < unit.len; ++i) {
      plan.positions.push_back(unit.start + i);
      plan.actions.push_back(action);
      plan.replacements.push_back(action == MaskAction::Random ? draw_replacement(vocab, rng) : -1);
    }
  }
  return plan;
}

}  // namespace

void ObjectiveConfig::validate() const {
  if (mask_ratio < 0.0 || mask_ratio > 1.0) config_error("mask_ratio must lie in [0, 1]");
  if (p_mask < 0 || p_random < 0 || p_keep < 0) config_error("action probabilities must be non-negative");
  if (std::abs(p_mask + p_random + p_keep - 1.0) > 1e-9) config_error("action split must sum to 1");
  if (nsp_negative_rate < 0.0 || nsp_negative_rate > 1.0) config_error("nsp_negative_rate must lie in [0, 1]");
}

nlohmann::json ObjectiveConfig::to_json() const {
  return {{"mask_ratio", mask_ratio},
          {"action_split", {p_mask, p_random, p_keep}},
          {"strategy", strategy == MaskStrategy::SpanSubchar ? "span_subchar" : "token_level"},
          {"nsp_negative_rate", nsp_negative_rate}};
}

ObjectiveConfig ObjectiveConfig::from_json(const nlohmann::json& j) {
  ObjectiveConfig c;
  if (!j.is_object()) config_error("objective must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "mask_ratio") {
      c.mask_ratio = value.get<double>();
    } else if (key == "action_split") {
      if (!value.is_array() || value.size() != 3) config_error("action_split is [mask, random, keep]");
      c.p_mask = value[0].get<double>();
      c.p_random = value[1].get<double>();
      c.p_keep = value[2].get<double>();
    } else if (key == "strategy") {
      const auto s = value.get<std::string>();
      if (s == "span_subchar") c.strategy = MaskStrategy::SpanSubchar;
      else if (s == "token_level") c.strategy = MaskStrategy::TokenLevel;
      else config_error("unknown masking strategy '" + s + "'");
    } else if (key == "nsp_negative_rate") {
      c.nsp_negative_rate = value.get<double>();
    } else {
      config_error("unknown key '" + key + "' in objective");
    }
  }
  c.validate();
  return c;
}

MaskingPlan plan_span_subchar_mask(const tokenizer::TokenSequence& seq, const tokenizer::Vocab& vocab,
                                   const ObjectiveConfig& cfg, nn::Rng& rng) {
  return plan_units(seq, vocab, cfg, rng, true);
}

MaskingPlan plan_token_mask(const tokenizer::TokenSequence& seq, const tokenizer::Vocab& vocab,
                            const ObjectiveConfig& cfg, nn::Rng& rng) {
  auto plan = plan_units(seq, vocab, cfg, rng, false);
  // Positions were drawn as units in ascending order already; only the
  // per-character list is meaningless here.
  plan.masked_chars.clear();
  return plan;
}

MaskingPlan plan_mask(const tokenizer::TokenSequence& seq, const tokenizer::Vocab& vocab, const ObjectiveConfig& cfg,
                      nn::Rng& rng) {
  return cfg.strategy == MaskStrategy::SpanSubchar ? plan_span_subchar_mask(seq, vocab, cfg, rng)
                                                   : plan_token_mask(seq, vocab, cfg, rng);
}

MaskedSequence apply_mask(const std::vector<int>& ids, const MaskingPlan& plan, const tokenizer::Vocab& vocab) {
  if (plan.seq_len != ids.size()) {
    throw Error(ErrorKind::AlignmentError, "plan for " + std::to_string(plan.seq_len) + " ids applied to " +
                                               std::to_string(ids.size()));
  }
  if (plan.actions.size() != plan.positions.size() || plan.replacements.size() != plan.positions.size()) {
    throw Error(ErrorKind::AlignmentError, "plan fields disagree in length");
  }
  MaskedSequence out{ids, std::vector<int>(ids.size(), kIgnoreId)};
  for (std::size_t i = 0; i < plan.positions.size(); ++i) {
    const std::size_t p = plan.positions[i];
    if (p >= ids.size()) throw Error(ErrorKind::AlignmentError, "plan position past the sequence end");
    out.targets[p] = ids[p];
    switch (plan.actions[i]) {
      case MaskAction::Mask:
        out.ids[p] = vocab.specials().mask;
        break;
      case MaskAction::Random:
        out.ids[p] = plan.replacements[i];
        break;
      case MaskAction::Keep:
        break;
    }
  }
  return out;
}

}  // namespace kombo::objectives
