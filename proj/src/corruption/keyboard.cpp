// SPDX-License-Identifier: Apache-2.0
#include "kombo/corruption/keyboard.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "embedded_data.hpp"
#include "kombo/error.hpp"
#include "kombo/hangul/utf8.hpp"

namespace kombo::corruption {
namespace {

char32_t single_scalar(std::string_view field, std::size_t line_no) {
  const auto u = utf8::decode(field);
  if (!u || u->size() != 1) {
    throw Error(ErrorKind::ParseError,
                "keyboard line " + std::to_string(line_no) + ": '" + std::string(field) + "' is not one letter");
  }
  return (*u)[0];
}

}  // namespace

KeyboardAdjacency KeyboardAdjacency::parse(std::string_view text) {
  KeyboardAdjacency kb;
  const auto lines = utf8::split(text, '\n');
  if (lines.empty() || lines[0] != "kombo-kbd v1") throw Error(ErrorKind::ParseError, "missing 'kombo-kbd v1' header");
  for (std::size_t n = 1; n < lines.size(); ++n) {
    std::string_view line = lines[n];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = utf8::split(line, '\t');
    if (cols.size() != 2) throw Error(ErrorKind::ParseError, "keyboard line " + std::to_string(n + 1) + " needs two columns");
    const char32_t key = single_scalar(cols[0], n + 1);
    if (kb.adj_.count(key)) throw Error(ErrorKind::ParseError, "duplicate keyboard entry '" + cols[0] + "'");
    auto& list = kb.adj_[key];
    for (const auto& field : utf8::split(cols[1], ',')) {
      const char32_t nb = single_scalar(field, n + 1);
      if (nb == key) throw Error(ErrorKind::ConfigError, "'" + cols[0] + "' is listed as its own neighbor");
      list.push_back(nb);
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  for (const auto& [key, list] : kb.adj_) {
    for (char32_t nb : list) {
      const auto& back = kb.neighbors(nb);
      if (!std::binary_search(back.begin(), back.end(), key)) {
        throw Error(ErrorKind::ConfigError,
                    "adjacency is not symmetric: " + utf8::encode(key) + " -> " + utf8::encode(nb));
      }
    }
  }
  return kb;
}

KeyboardAdjacency KeyboardAdjacency::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const KeyboardAdjacency& KeyboardAdjacency::builtin() {
  static const KeyboardAdjacency kb = parse(data::kKeyboardAdjacency);
  return kb;
}

const std::vector<char32_t>& KeyboardAdjacency::neighbors(char32_t letter) const {
  static const std::vector<char32_t> none;
  const auto it = adj_.find(letter);
  return it == adj_.end() ? none : it->second;
}

}  // namespace kombo::corruption
