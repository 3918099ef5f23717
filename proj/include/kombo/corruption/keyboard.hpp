// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

namespace kombo::corruption {

/// Neighboring keys on the dubeolsik layout.
///
/// File format: header `kombo-kbd v1`, then `<letter>\t<n1>,<n2>,...` per
/// line; `#` starts a comment. Loading rejects self-edges and one-way edges
/// (ConfigError) as well as malformed lines (ParseError).
class KeyboardAdjacency {
 public:
  static KeyboardAdjacency parse(std::string_view text);
  static KeyboardAdjacency load(const std::filesystem::path& path);
  static const KeyboardAdjacency& builtin();

  /// Empty for letters without an entry.
  const std::vector<char32_t>& neighbors(char32_t letter) const;
  bool has_neighbors(char32_t letter) const { return !neighbors(letter).empty(); }
  std::size_t size() const { return adj_.size(); }
  const std::map<char32_t, std::vector<char32_t>>& entries() const { return adj_; }

 private:
  std::map<char32_t, std::vector<char32_t>> adj_;
};

}  // namespace kombo::corruption
