// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kombo/hangul/scheme.hpp"
#include "kombo/tokenizer/vocab.hpp"

namespace kombo::tokenizer {

enum class SpanKind { Syllable, Passthrough, Special };

struct CharSpan {
  std::size_t start = 0;
  std::size_t len = 0;
  SpanKind kind = SpanKind::Syllable;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

/// Subcharacter ids for a run of text. Each logical character, special token
/// or pad occupies exactly one span of `tokens_per_char` ids.
struct TokenSequence {
  std::vector<int> ids;
  hangul::UnitScheme scheme;
  std::vector<CharSpan> spans;

  std::size_t char_count() const { return spans.size(); }
};

struct EncodeOptions {
  std::size_t max_len = 0;  // 0 = unlimited; otherwise an id budget
  bool add_cls_sep = false;
};

struct DecodeResult {
  std::string text;
  /// Indices of spans that did not decode cleanly (raw atoms were emitted).
  std::vector<std::size_t> flagged_spans;

  bool lossless() const { return flagged_spans.empty(); }
};

class Tokenizer {
 public:
  explicit Tokenizer(Vocab vocab, const hangul::BtsTables& tables = hangul::BtsTables::builtin());

  const Vocab& vocab() const { return vocab_; }
  const hangul::UnitScheme& scheme() const { return vocab_.scheme(); }
  int tokens_per_char() const { return vocab_.scheme().tokens_per_char; }

  /// Truncates at a character boundary so that ids.size() <= max_len.
  /// Throws ConfigTooSmall when CLS/SEP alone would not fit.
  TokenSequence encode(std::string_view text, const EncodeOptions& options = {}) const;

  /// `[CLS] a [SEP] b [SEP]`, trimming the longer side first to fit max_len.
  TokenSequence encode_pair(std::string_view a, std::string_view b, std::size_t max_len) const;

  /// Appends PAD spans up to `len` ids. `len` must be a multiple of
  /// tokens_per_char and no shorter than the sequence.
  void pad_to(TokenSequence& seq, std::size_t len) const;

  DecodeResult decode(const TokenSequence& seq) const;
  DecodeResult decode(std::span<const int> ids) const;

  /// Span of one character's ids as vocabulary symbols.
  std::vector<std::string> symbols(std::span<const int> ids) const;

 private:
  void append_char(TokenSequence& seq, char32_t ch) const;
  void append_special(TokenSequence& seq, int id) const;

  Vocab vocab_;
  hangul::SchemeCodec codec_;
  std::vector<int> syllable_ids_;  // kSyllableCount x tokens_per_char, subcharacter schemes only
};

/// 0-based character index of every id position (i / tokens_per_char).
/// Throws MalformedSequence unless the spans tile the ids with uniform width.
std::vector<std::size_t> char_alignment(const TokenSequence& seq);

}  // namespace kombo::tokenizer
