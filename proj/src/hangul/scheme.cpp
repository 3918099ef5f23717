// SPDX-License-Identifier: Apache-2.0
#include "kombo/hangul/scheme.hpp"

#include <algorithm>

#include "kombo/error.hpp"
#include "kombo/hangul/utf8.hpp"

namespace kombo::hangul {
namespace {

std::vector<std::string> padded(const AtomList& atoms, int width) {
  if (static_cast<int>(atoms.size()) > width) {
    throw Error(ErrorKind::TableGap, "expansion wider than its slot group");
  }
  std::vector<std::string> out(atoms.begin(), atoms.end());
  out.resize(static_cast<std::size_t>(width), kEmptySymbol);
  return out;
}

std::vector<std::string> single(char32_t jamo, int width) {
  return padded({utf8::encode(jamo)}, width);
}

void append_unique(std::vector<std::string>& out, const std::string& s) {
  if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
}

}  // namespace

SchemeCodec::SchemeCodec(UnitScheme scheme, const BtsTables& tables)
    : scheme_(scheme), tables_(&tables) {
  if (!scheme_.is_subcharacter()) return;
  for (int c = 0; c < kChoCount; ++c) cho_inverse_.emplace(group_for_cho(c), c);
  for (int v = 0; v < kJungCount; ++v) jung_inverse_.emplace(group_for_jung(v), v);
  for (int f = 0; f < kJongCount; ++f) jong_inverse_.emplace(group_for_jong(f), f);
  if (cho_inverse_.size() != kChoCount || jung_inverse_.size() != kJungCount ||
      jong_inverse_.size() != kJongCount) {
    throw Error(ErrorKind::TableGap, "padded expansions are not injective for " + scheme_.name());
  }
}

std::vector<std::string> SchemeCodec::group_for_cho(int cho) const {
  const bool atoms = scheme_.kind == SchemeKind::Stroke || scheme_.kind == SchemeKind::Bts;
  return atoms ? padded(tables_->cho(cho), scheme_.cho_slots) : single(choseong(cho), scheme_.cho_slots);
}

std::vector<std::string> SchemeCodec::group_for_jung(int jung) const {
  const bool atoms = scheme_.kind == SchemeKind::Cji || scheme_.kind == SchemeKind::Bts;
  return atoms ? padded(tables_->jung(jung), scheme_.jung_slots)
               : single(jungseong(jung), scheme_.jung_slots);
}

std::vector<std::string> SchemeCodec::group_for_jong(int jong) const {
  if (jong == 0) return padded({}, scheme_.jong_slots);
  const bool atoms = scheme_.kind == SchemeKind::Stroke || scheme_.kind == SchemeKind::Bts;
  return atoms ? padded(tables_->jong(jong), scheme_.jong_slots)
               : single(jongseong(jong), scheme_.jong_slots);
}

std::vector<std::string> SchemeCodec::expand(const SyllableDecomposition& d) const {
  if (!scheme_.is_subcharacter()) {
    throw Error(ErrorKind::ConfigError, "the character scheme has no subcharacter expansion");
  }
  compose_syllable(d);  // validates the indices
  std::vector<std::string> out = group_for_cho(d.cho);
  const auto v = group_for_jung(d.jung);
  const auto f = group_for_jong(d.jong);
  out.insert(out.end(), v.begin(), v.end());
  out.insert(out.end(), f.begin(), f.end());
  return out;
}

std::optional<SyllableDecomposition> SchemeCodec::invert(std::span<const std::string> symbols) const {
  if (!scheme_.is_subcharacter() || static_cast<int>(symbols.size()) != scheme_.tokens_per_char) {
    return std::nullopt;
  }
  const auto group = [&](int begin, int len) {
    return std::vector<std::string>(symbols.begin() + begin, symbols.begin() + begin + len);
  };
  const auto c = cho_inverse_.find(group(scheme_.cho_begin(), scheme_.cho_slots));
  const auto v = jung_inverse_.find(group(scheme_.jung_begin(), scheme_.jung_slots));
  const auto f = jong_inverse_.find(group(scheme_.jong_begin(), scheme_.jong_slots));
  if (c == cho_inverse_.end() || v == jung_inverse_.end() || f == jong_inverse_.end()) {
    return std::nullopt;
  }
  return SyllableDecomposition{c->second, v->second, f->second};
}

std::vector<std::string> SchemeCodec::alphabet() const {
  std::vector<std::string> out;
  if (!scheme_.is_subcharacter()) return out;
  const bool split_consonants = scheme_.kind == SchemeKind::Stroke || scheme_.kind == SchemeKind::Bts;
  const bool split_vowels = scheme_.kind == SchemeKind::Cji || scheme_.kind == SchemeKind::Bts;
  if (split_consonants) {
    for (const auto& a : tables_->consonant_atoms()) append_unique(out, a);
  } else {
    for (int c = 0; c < kChoCount; ++c) append_unique(out, utf8::encode(choseong(c)));
  }
  if (split_vowels) {
    for (const auto& a : tables_->vowel_atoms()) append_unique(out, a);
  } else {
    for (int v = 0; v < kJungCount; ++v) append_unique(out, utf8::encode(jungseong(v)));
  }
  if (!split_consonants) {
    for (int f = 1; f < kJongCount; ++f) append_unique(out, utf8::encode(jongseong(f)));
  }
  append_unique(out, kEmptySymbol);
  return out;
}

std::vector<std::string> expand_to_scheme(const SyllableDecomposition& d, const UnitScheme& scheme) {
  return SchemeCodec(scheme).expand(d);
}

}  // namespace kombo::hangul
