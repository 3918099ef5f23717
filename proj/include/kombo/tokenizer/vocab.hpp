// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kombo/hangul/unit_scheme.hpp"

namespace kombo::tokenizer {

struct SpecialIds {
  int pad = 0;
  int unk = 1;
  int cls = 2;
  int sep = 3;
  int mask = 4;
  int empty = 5;
};

inline constexpr int kSpecialCount = 6;

/// Which non-Hangul characters seen in a corpus get their own vocabulary
/// entry. Everything else encodes as UNK.
struct PassthroughPolicy {
  bool ascii = true;   // printable ASCII letters, digits and space
  bool punct = true;
  bool other = false;  // any other scalar, e.g. standalone compatibility jamo

  bool admits(char32_t ch) const;
};

/// Dense id <-> symbol table for one scheme.
///
/// Ordering is specials, then the scheme alphabet, then passthrough symbols in
/// first-occurrence order. The empty padding symbol is both a special and the
/// last alphabet entry, so it holds a single id.
class Vocab {
 public:
  static Vocab build(std::istream& corpus, const hangul::UnitScheme& scheme,
                     const PassthroughPolicy& policy = {});
  static Vocab build(const std::vector<std::string>& lines, const hangul::UnitScheme& scheme,
                     const PassthroughPolicy& policy = {});

  /// Vocab file: `kombo-vocab v1 <scheme>`, then one symbol per line with the
  /// six specials first, each prefixed by `!`.
  static Vocab parse(std::string_view text);
  static Vocab load(const std::filesystem::path& path);
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  const hangul::UnitScheme& scheme() const { return scheme_; }
  const SpecialIds& specials() const { return specials_; }
  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(int id) const;
  std::optional<int> id_of(std::string_view symbol) const;

  bool is_special(int id) const { return id >= 0 && id < kSpecialCount; }
  /// True for single-scalar symbols that decode as themselves when they sit
  /// alone in an otherwise empty span.
  bool is_passthrough(int id) const;

  /// Number of symbols lost to malformed UTF-8 lines during build.
  std::size_t skipped_lines() const { return skipped_lines_; }

 private:
  Vocab() = default;
  void add(const std::string& symbol);

  hangul::UnitScheme scheme_;
  SpecialIds specials_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
  std::size_t skipped_lines_ = 0;
};

}  // namespace kombo::tokenizer
