// SPDX-License-Identifier: Apache-2.0
#include "kombo/tokenizer/tokenizer.hpp"

#include <algorithm>

#include "kombo/error.hpp"
#include "kombo/hangul/jamo.hpp"
#include "kombo/hangul/utf8.hpp"

namespace kombo::tokenizer {

using hangul::kSyllableCount;

Tokenizer::Tokenizer(Vocab vocab, const hangul::BtsTables& tables)
    : vocab_(std::move(vocab)), codec_(vocab_.scheme(), tables) {
  if (!scheme().is_subcharacter()) return;
  const auto tpc = static_cast<std::size_t>(tokens_per_char());
  syllable_ids_.assign(static_cast<std::size_t>(kSyllableCount) * tpc, vocab_.specials().unk);
  for (int s = 0; s < kSyllableCount; ++s) {
    const auto syms = codec_.expand(hangul::decompose_syllable(hangul::kSyllableFirst + static_cast<char32_t>(s)));
    for (std::size_t j = 0; j < tpc; ++j) {
      syllable_ids_[static_cast<std::size_t>(s) * tpc + j] = vocab_.id_of(syms[j]).value_or(vocab_.specials().unk);
    }
  }
}

void Tokenizer::append_special(TokenSequence& seq, int id) const {
  const std::size_t start = seq.ids.size();
  seq.ids.push_back(id);
  seq.ids.resize(start + static_cast<std::size_t>(tokens_per_char()), vocab_.specials().empty);
  seq.spans.push_back({start, seq.ids.size() - start, SpanKind::Special});
}

void Tokenizer::append_char(TokenSequence& seq, char32_t ch) const {
  const std::size_t start = seq.ids.size();
  const auto tpc = static_cast<std::size_t>(tokens_per_char());
  const auto& sp = vocab_.specials();
  if (hangul::is_syllable(ch)) {
    if (scheme().is_subcharacter()) {
      const auto base = static_cast<std::size_t>(ch - hangul::kSyllableFirst) * tpc;
      seq.ids.insert(seq.ids.end(), syllable_ids_.begin() + static_cast<std::ptrdiff_t>(base),
                     syllable_ids_.begin() + static_cast<std::ptrdiff_t>(base + tpc));
    } else {
      seq.ids.push_back(vocab_.id_of(utf8::encode(ch)).value_or(sp.unk));
    }
    seq.spans.push_back({start, tpc, SpanKind::Syllable});
    return;
  }
  const auto id = vocab_.id_of(utf8::encode(ch));
  const bool known = id && vocab_.is_passthrough(*id);
  seq.ids.push_back(known ? *id : sp.unk);
  seq.ids.resize(start + tpc, sp.empty);
  seq.spans.push_back({start, tpc, SpanKind::Passthrough});
}

TokenSequence Tokenizer::encode(std::string_view text, const EncodeOptions& options) const {
  const auto tpc = static_cast<std::size_t>(tokens_per_char());
  if (options.add_cls_sep && options.max_len != 0 && options.max_len < 2 * tpc) {
    throw Error(ErrorKind::ConfigTooSmall, "max_len " + std::to_string(options.max_len) +
                                               " cannot hold CLS and SEP spans of width " + std::to_string(tpc));
  }
  const auto chars = utf8::decode_or_throw(text);
  std::size_t budget = chars.size();
  if (options.max_len != 0) {
    const std::size_t slots = options.max_len / tpc - (options.add_cls_sep ? 2 : 0);
    budget = std::min(budget, slots);
  }

  TokenSequence seq;
  seq.scheme = scheme();
  seq.ids.reserve((budget + 2) * tpc);
  if (options.add_cls_sep) append_special(seq, vocab_.specials().cls);
  for (std::size_t i = 0; i < budget; ++i) append_char(seq, chars[i]);
  if (options.add_cls_sep) append_special(seq, vocab_.specials().sep);
  return seq;
}

TokenSequence Tokenizer::encode_pair(std::string_view a, std::string_view b, std::size_t max_len) const {
  const auto tpc = static_cast<std::size_t>(tokens_per_char());
  if (max_len < 3 * tpc) {
    throw Error(ErrorKind::ConfigTooSmall, "max_len " + std::to_string(max_len) + " cannot hold a sentence pair");
  }
  auto ca = utf8::decode_or_throw(a);
  auto cb = utf8::decode_or_throw(b);
  const std::size_t budget = max_len / tpc - 3;
  while (ca.size() + cb.size() > budget) {
    (ca.size() >= cb.size() ? ca : cb).pop_back();
  }
  TokenSequence seq;
  seq.scheme = scheme();
  append_special(seq, vocab_.specials().cls);
  for (char32_t ch : ca) append_char(seq, ch);
  append_special(seq, vocab_.specials().sep);
  for (char32_t ch : cb) append_char(seq, ch);
  append_special(seq, vocab_.specials().sep);
  return seq;
}

void Tokenizer::pad_to(TokenSequence& seq, std::size_t len) const {
  const auto tpc = static_cast<std::size_t>(tokens_per_char());
  if (len % tpc != 0 || len < seq.ids.size()) {
    throw Error(ErrorKind::AlignmentError, "cannot pad " + std::to_string(seq.ids.size()) + " ids to " +
                                               std::to_string(len));
  }
  while (seq.ids.size() < len) {
    const std::size_t start = seq.ids.size();
    seq.ids.resize(start + tpc, vocab_.specials().pad);
    seq.spans.push_back({start, tpc, SpanKind::Special});
  }
}

std::vector<std::string> Tokenizer::symbols(std::span<const int> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(vocab_.symbol(id));
  return out;
}

DecodeResult Tokenizer::decode(std::span<const int> ids) const {
  const auto tpc = static_cast<std::size_t>(tokens_per_char());
  if (ids.size() % tpc != 0) {
    throw Error(ErrorKind::MalformedSequence, "id count is not a multiple of tokens_per_char");
  }
  const auto& sp = vocab_.specials();
  DecodeResult result;
  for (std::size_t span = 0; span * tpc < ids.size(); ++span) {
    const auto chunk = ids.subspan(span * tpc, tpc);
    const int head = chunk.front();
    const bool tail_empty = std::all_of(chunk.begin() + 1, chunk.end(), [&](int id) { return id == sp.empty; });

    const bool all_pad = std::all_of(chunk.begin(), chunk.end(), [&](int id) { return id == sp.pad; });
    if (all_pad || (tail_empty && (head == sp.pad || head == sp.cls || head == sp.sep))) continue;
    if (tail_empty && head == sp.unk) {
      result.text += utf8::encode(char32_t{0xFFFD});
      result.flagged_spans.push_back(span);
      continue;
    }
    if (tail_empty && vocab_.is_passthrough(head)) {
      result.text += vocab_.symbol(head);
      continue;
    }
    if (!scheme().is_subcharacter()) {
      const auto cps = utf8::decode(vocab_.symbol(head));
      if (cps && cps->size() == 1 && hangul::is_syllable(cps->front())) {
        result.text += vocab_.symbol(head);
        continue;
      }
    } else if (const auto d = codec_.invert(symbols(chunk))) {
      result.text += utf8::encode(hangul::compose_syllable(*d));
      continue;
    }
    for (int id : chunk) result.text += vocab_.symbol(id);
    result.flagged_spans.push_back(span);
  }
  return result;
}

DecodeResult Tokenizer::decode(const TokenSequence& seq) const { return decode(std::span<const int>(seq.ids)); }

std::vector<std::size_t> char_alignment(const TokenSequence& seq) {
  const auto tpc = static_cast<std::size_t>(seq.scheme.tokens_per_char);
  std::size_t expected = 0;
  for (const auto& s : seq.spans) {
    if (s.start != expected || s.len != tpc) {
      throw Error(ErrorKind::MalformedSequence, "span at " + std::to_string(s.start) + " breaks the " +
                                                    std::to_string(tpc) + "-wide grid");
    }
    expected += s.len;
  }
  if (expected != seq.ids.size()) {
    throw Error(ErrorKind::MalformedSequence, "spans do not cover every id");
  }
  std::vector<std::size_t> out(seq.ids.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i / tpc;
  return out;
}

}  // namespace kombo::tokenizer
