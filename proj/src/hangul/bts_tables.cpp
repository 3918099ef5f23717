// SPDX-License-Identifier: Apache-2.0
#include "kombo/hangul/bts_tables.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "embedded_data.hpp"
#include "kombo/error.hpp"
#include "kombo/hangul/utf8.hpp"

namespace kombo::hangul {
namespace {

constexpr std::string_view kHeader = "kombo-bts-tables v1";

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

template <std::size_t N>
void check_injective(const std::array<AtomList, N>& groups, const char* what) {
  std::set<AtomList> seen;
  for (const auto& g : groups) {
    if (!seen.insert(g).second) {
      throw Error(ErrorKind::TableGap, std::string("two ") + what + " share one expansion");
    }
  }
}

void note_atoms(const AtomList& atoms, std::vector<std::string>& ordered) {
  for (const auto& a : atoms) {
    if (std::find(ordered.begin(), ordered.end(), a) == ordered.end()) ordered.push_back(a);
  }
}

}  // namespace

BtsTables BtsTables::parse(std::string_view text) {
  BtsTables t;
  std::array<bool, kChoCount> have_cho{};
  std::array<bool, kJungCount> have_jung{};
  std::array<bool, kJongCount - 1> have_jong{};

  std::istringstream in{std::string(text)};
  std::string raw;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim_cr(raw);
    if (!header_seen) {
      if (line != kHeader) {
        throw Error(ErrorKind::ParseError, "expected header '" + std::string(kHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;

    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": missing tab");
    }
    const auto key = utf8::decode_or_throw(line.substr(0, tab));
    if (key.size() != 1) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": key must be one jamo");
    }
    AtomList atoms = utf8::split(line.substr(tab + 1), ',');
    if (std::any_of(atoms.begin(), atoms.end(), [](const auto& a) { return a.empty(); })) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": empty atom");
    }

    const char32_t k = key.front();
    if (const int i = choseong_index(k); i >= 0) {
      if (atoms.size() > kMaxConsonantAtoms) throw Error(ErrorKind::TableGap, "initial expands past 4 atoms");
      t.cho_[static_cast<std::size_t>(i)] = std::move(atoms);
      have_cho[static_cast<std::size_t>(i)] = true;
    } else if (const int v = jungseong_index(k); v >= 0) {
      if (atoms.size() > kMaxVowelAtoms) throw Error(ErrorKind::TableGap, "vowel expands past 5 atoms");
      t.jung_[static_cast<std::size_t>(v)] = std::move(atoms);
      have_jung[static_cast<std::size_t>(v)] = true;
    } else if (const int f = jongseong_index(k); f >= 1) {
      if (atoms.size() > kMaxConsonantAtoms) throw Error(ErrorKind::TableGap, "final expands past 4 atoms");
      t.jong_[static_cast<std::size_t>(f - 1)] = std::move(atoms);
      have_jong[static_cast<std::size_t>(f - 1)] = true;
    } else {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": key is not a positional jamo");
    }
  }
  if (!header_seen) throw Error(ErrorKind::ParseError, "empty table file");

  const auto all = [](const auto& flags) { return std::all_of(flags.begin(), flags.end(), [](bool b) { return b; }); };
  if (!all(have_cho) || !all(have_jung) || !all(have_jong)) {
    throw Error(ErrorKind::TableGap, "table does not cover every modern jamo");
  }
  check_injective(t.cho_, "initials");
  check_injective(t.jung_, "vowels");
  check_injective(t.jong_, "finals");

  for (const auto& g : t.cho_) note_atoms(g, t.consonant_atoms_);
  for (const auto& g : t.jong_) note_atoms(g, t.consonant_atoms_);
  for (const auto& g : t.jung_) note_atoms(g, t.vowel_atoms_);
  return t;
}

BtsTables BtsTables::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const BtsTables& BtsTables::builtin() {
  static const BtsTables tables = parse(data::kBtsTables);
  return tables;
}

}  // namespace kombo::hangul
