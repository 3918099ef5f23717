// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kombo/hangul/bts_tables.hpp"
#include "kombo/hangul/jamo.hpp"
#include "kombo/hangul/unit_scheme.hpp"

namespace kombo::hangul {

/// The one padding symbol shared by every scheme.
inline constexpr const char* kEmptySymbol = "∅";

/// Expands syllables into fixed-width symbol groups for a scheme and inverts
/// such groups back into syllables.
class SchemeCodec {
 public:
  SchemeCodec(UnitScheme scheme, const BtsTables& tables = BtsTables::builtin());

  const UnitScheme& scheme() const { return scheme_; }

  /// Exactly `tokens_per_char` symbols; each group is left-filled and padded
  /// with kEmptySymbol. Throws ConfigError for the Character scheme.
  std::vector<std::string> expand(const SyllableDecomposition& d) const;

  /// Inverse of expand; nullopt when any group matches no jamo.
  std::optional<SyllableDecomposition> invert(std::span<const std::string> symbols) const;

  /// Full symbol inventory for the scheme, kEmptySymbol last.
  std::vector<std::string> alphabet() const;

 private:
  std::vector<std::string> group_for_cho(int cho) const;
  std::vector<std::string> group_for_jung(int jung) const;
  std::vector<std::string> group_for_jong(int jong) const;

  UnitScheme scheme_;
  const BtsTables* tables_;
  std::map<std::vector<std::string>, int> cho_inverse_;
  std::map<std::vector<std::string>, int> jung_inverse_;
  std::map<std::vector<std::string>, int> jong_inverse_;
};

/// Convenience over the builtin tables.
std::vector<std::string> expand_to_scheme(const SyllableDecomposition& d, const UnitScheme& scheme);

}  // namespace kombo::hangul
