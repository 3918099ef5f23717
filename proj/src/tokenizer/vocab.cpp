// SPDX-License-Identifier: Apache-2.0
#include "kombo/tokenizer/vocab.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "kombo/error.hpp"
#include "kombo/hangul/jamo.hpp"
#include "kombo/hangul/scheme.hpp"
#include "kombo/hangul/utf8.hpp"

namespace kombo::tokenizer {
namespace {

constexpr std::array<const char*, kSpecialCount> kSpecialSymbols = {
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", hangul::kEmptySymbol};

constexpr std::string_view kHeaderPrefix = "kombo-vocab v1 ";

}  // namespace

bool PassthroughPolicy::admits(char32_t ch) const {
  switch (hangul::classify_char(ch)) {
    case hangul::CharClass::HangulSyllable: return false;
    case hangul::CharClass::Ascii: return ascii && ch >= 0x20 && ch < 0x7F;
    case hangul::CharClass::Punct: return punct;
    case hangul::CharClass::Other: return other && !(ch >= 0x1100 && ch <= 0x11FF);
  }
  return false;
}

void Vocab::add(const std::string& symbol) {
  if (index_.contains(symbol)) return;
  index_.emplace(symbol, static_cast<int>(symbols_.size()));
  symbols_.push_back(symbol);
}

Vocab Vocab::build(std::istream& corpus, const hangul::UnitScheme& scheme,
                   const PassthroughPolicy& policy) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(corpus, line)) lines.push_back(std::move(line));
  return build(lines, scheme, policy);
}

Vocab Vocab::build(const std::vector<std::string>& lines, const hangul::UnitScheme& scheme,
                   const PassthroughPolicy& policy) {
  Vocab v;
  v.scheme_ = scheme;
  for (const char* s : kSpecialSymbols) v.add(s);
  for (const auto& s : hangul::SchemeCodec(scheme).alphabet()) v.add(s);

  std::vector<char32_t> passthrough;
  std::set<char32_t> seen_syllables;
  std::set<char32_t> seen_passthrough;
  for (const auto& raw : lines) {
    auto decoded = utf8::decode(raw);
    if (!decoded) {
      ++v.skipped_lines_;
      continue;
    }
    for (char32_t ch : *decoded) {
      if (hangul::is_syllable(ch)) {
        seen_syllables.insert(ch);
      } else if (policy.admits(ch) && seen_passthrough.insert(ch).second) {
        passthrough.push_back(ch);
      }
    }
  }
  if (!scheme.is_subcharacter()) {
    for (char32_t s : seen_syllables) v.add(utf8::encode(s));
  }
  for (char32_t ch : passthrough) v.add(utf8::encode(ch));
  return v;
}

const std::string& Vocab::symbol(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw Error(ErrorKind::VocabError, "id " + std::to_string(id) + " outside vocabulary");
  }
  return symbols_[static_cast<std::size_t>(id)];
}

std::optional<int> Vocab::id_of(std::string_view symbol) const {
  const auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Vocab::is_passthrough(int id) const {
  if (is_special(id) || id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) return false;
  const auto cps = utf8::decode(symbols_[static_cast<std::size_t>(id)]);
  if (!cps || cps->size() != 1) return false;
  const char32_t ch = cps->front();
  return !hangul::is_syllable(ch) && !(ch >= 0x1100 && ch <= 0x11FF);
}

std::string Vocab::serialize() const {
  std::string out(kHeaderPrefix);
  out += scheme_.name();
  out += '\n';
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (i < kSpecialCount) out += '!';
    out += symbols_[i];
    out += '\n';
  }
  return out;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << serialize();
}

Vocab Vocab::parse(std::string_view text) {
  Vocab v;
  const auto lines = utf8::split(text, '\n');
  if (lines.empty() || !lines.front().starts_with(kHeaderPrefix)) {
    throw Error(ErrorKind::ParseError, "missing 'kombo-vocab v1' header");
  }
  v.scheme_ = hangul::UnitScheme::parse(lines.front().substr(kHeaderPrefix.size()));
  // A trailing newline leaves one empty field; a symbol line is never empty.
  const std::size_t end = (lines.size() > 1 && lines.back().empty()) ? lines.size() - 1 : lines.size();
  for (std::size_t i = 1; i < end; ++i) {
    std::string sym = lines[i];
    if (!sym.empty() && sym.back() == '\r' && sym.size() > 1) sym.pop_back();
    const std::size_t id = i - 1;
    if (id < kSpecialCount) {
      if (sym != std::string("!") + kSpecialSymbols[id]) {
        throw Error(ErrorKind::VocabError, "special #" + std::to_string(id) + " must be !" + kSpecialSymbols[id]);
      }
      sym.erase(0, 1);
    }
    if (sym.empty() || v.index_.contains(sym)) {
      throw Error(ErrorKind::VocabError, "empty or duplicate symbol on line " + std::to_string(i + 1));
    }
    v.add(sym);
  }
  if (v.symbols_.size() < kSpecialCount) throw Error(ErrorKind::VocabError, "vocabulary lacks specials");
  return v;
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace kombo::tokenizer
