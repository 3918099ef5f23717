// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "kombo/model/model.hpp"
#include "kombo/tokenizer/tokenizer.hpp"

namespace kombo::harness {

enum class ProbeSource { StaticEmbedding, ContextualKombo };

std::string to_string(ProbeSource s);
ProbeSource parse_probe_source(const std::string& name);  // "static" | "kombo"

struct ProbeReport {
  std::string sentence;
  std::vector<std::string> anchors;
  std::vector<std::string> characters;      // sentence characters in order
  std::vector<std::vector<double>> cosine;  // anchors x characters
  ProbeSource source = ProbeSource::ContextualKombo;

  /// Header row of characters, then one row per anchor.
  std::string to_csv() const;
};

/// Cosine similarity between the vector of each anchor's first occurrence and
/// every character of the sentence.
///
/// ContextualKombo uses rows of the stack output for `[CLS] sentence [SEP]`.
/// StaticEmbedding sums the token-embedding rows of each character's
/// subcharacters, with no position or context. Throws AnchorNotFound when an
/// anchor is not a character of the (possibly truncated) sentence.
ProbeReport probe_similarity(const model::KomboModel<float>& m, const tokenizer::Tokenizer& tok,
                             const std::string& sentence, const std::vector<std::string>& anchors,
                             ProbeSource source);

/// Zero when either vector is zero.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace kombo::harness
