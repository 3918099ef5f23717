// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kombo/hangul/jamo.hpp"

namespace kombo::hangul {

inline constexpr int kMaxConsonantAtoms = 4;
inline constexpr int kMaxVowelAtoms = 5;

using AtomList = std::vector<std::string>;

/// Jamo to stroke/element decompositions backing the Stroke, Cji and BTS
/// schemes.
///
/// The text format is `kombo-bts-tables v1` followed by lines of
/// `<jamo>\t<atom>[,<atom>...]`; `#` starts a comment. Keys are positional
/// jamo: 19 initials, 21 vowels and 27 finals, all required. Parsing rejects
/// over-long entries and any pair of keys in one position class that expand to
/// the same atoms.
class BtsTables {
 public:
  static BtsTables parse(std::string_view text);
  static BtsTables load(const std::filesystem::path& path);

  /// Tables compiled in from data/bts_tables.txt.
  static const BtsTables& builtin();

  const AtomList& cho(int index) const { return cho_.at(static_cast<std::size_t>(index)); }
  const AtomList& jung(int index) const { return jung_.at(static_cast<std::size_t>(index)); }
  /// `index` in 1..27.
  const AtomList& jong(int index) const { return jong_.at(static_cast<std::size_t>(index - 1)); }

  /// Distinct consonant atoms in first-appearance order.
  const std::vector<std::string>& consonant_atoms() const { return consonant_atoms_; }
  const std::vector<std::string>& vowel_atoms() const { return vowel_atoms_; }

 private:
  std::array<AtomList, kChoCount> cho_;
  std::array<AtomList, kJungCount> jung_;
  std::array<AtomList, kJongCount - 1> jong_;
  std::vector<std::string> consonant_atoms_;
  std::vector<std::string> vowel_atoms_;
};

}  // namespace kombo::hangul
