// SPDX-License-Identifier: Apache-2.0
#include "kombo/corruption/letters.hpp"

#include <array>
#include <optional>

#include "kombo/hangul/jamo.hpp"

namespace kombo::corruption {
namespace {

using namespace kombo::hangul;

struct Pair {
  char32_t whole, first, second;
};

constexpr std::array<Pair, 7> kVowelPairs{{{U'ㅘ', U'ㅗ', U'ㅏ'},
                                           {U'ㅙ', U'ㅗ', U'ㅐ'},
                                           {U'ㅚ', U'ㅗ', U'ㅣ'},
                                           {U'ㅝ', U'ㅜ', U'ㅓ'},
                                           {U'ㅞ', U'ㅜ', U'ㅔ'},
                                           {U'ㅟ', U'ㅜ', U'ㅣ'},
                                           {U'ㅢ', U'ㅡ', U'ㅣ'}}};

constexpr std::array<Pair, 11> kClusterPairs{{{U'ㄳ', U'ㄱ', U'ㅅ'},
                                              {U'ㄵ', U'ㄴ', U'ㅈ'},
                                              {U'ㄶ', U'ㄴ', U'ㅎ'},
                                              {U'ㄺ', U'ㄹ', U'ㄱ'},
                                              {U'ㄻ', U'ㄹ', U'ㅁ'},
                                              {U'ㄼ', U'ㄹ', U'ㅂ'},
                                              {U'ㄽ', U'ㄹ', U'ㅅ'},
                                              {U'ㄾ', U'ㄹ', U'ㅌ'},
                                              {U'ㄿ', U'ㄹ', U'ㅍ'},
                                              {U'ㅀ', U'ㄹ', U'ㅎ'},
                                              {U'ㅄ', U'ㅂ', U'ㅅ'}}};

template <std::size_t N>
const Pair* split_of(const std::array<Pair, N>& table, char32_t whole) {
  for (const auto& p : table)
    if (p.whole == whole) return &p;
  return nullptr;
}

template <std::size_t N>
char32_t join_of(const std::array<Pair, N>& table, char32_t a, char32_t b) {
  for (const auto& p : table)
    if (p.first == a && p.second == b) return p.whole;
  return 0;
}

void append_split(std::u32string& out, char32_t ch) {
  if (const Pair* p = split_of(kVowelPairs, ch)) {
    out += p->first;
    out += p->second;
  } else if (const Pair* q = split_of(kClusterPairs, ch)) {
    out += q->first;
    out += q->second;
  } else {
    out += ch;
  }
}

int cho_of(char32_t letter) {
  for (int i = 0; i < kChoCount; ++i)
    if (compat_of_cho(i) == letter) return i;
  return -1;
}

int jung_of(char32_t letter) {
  for (int i = 0; i < kJungCount; ++i)
    if (compat_of_jung(i) == letter) return i;
  return -1;
}

int jong_of(char32_t letter) {
  for (int i = 1; i < kJongCount; ++i)
    if (compat_of_jong(i) == letter) return i;
  return -1;
}

class Composer {
 public:
  explicit Composer(std::u32string& out) : out_(out) {}

  void feed(char32_t ch) {
    if (!is_key_letter(ch)) {
      flush();
      out_ += ch;
    } else if (is_vowel_letter(ch)) {
      vowel(ch);
    } else {
      consonant(ch);
    }
  }

  void flush() {
    if (cho_ && jung_) {
      out_ += compose_syllable({cho_of(cho_), jung_of(jung_), jong_ ? jong_of(jong_) : 0});
    } else {
      if (cho_) out_ += cho_;
      if (jung_) append_split(out_, jung_);
    }
    cho_ = jung_ = jong_ = 0;
  }

 private:
  void consonant(char32_t c) {
    if (cho_ && jung_) {
      if (!jong_) {
        if (jong_of(c) >= 0) {
          jong_ = c;
          return;
        }
      } else if (!split_of(kClusterPairs, jong_)) {
        if (char32_t cluster = join_of(kClusterPairs, jong_, c)) {
          jong_ = cluster;
          return;
        }
      }
    }
    flush();
    cho_ = c;
  }

  void vowel(char32_t v) {
    if (cho_ && jung_ && jong_) {
      // The final consonant (or the second half of a cluster) moves on to
      // start the next syllable.
      char32_t carried = jong_;
      if (const Pair* p = split_of(kClusterPairs, jong_)) {
        jong_ = p->first;
        carried = p->second;
      } else {
        jong_ = 0;
      }
      flush();
      cho_ = carried;
      jung_ = v;
      return;
    }
    if (cho_ && jung_) {
      if (!split_of(kVowelPairs, jung_)) {
        if (char32_t compound = join_of(kVowelPairs, jung_, v)) {
          jung_ = compound;
          return;
        }
      }
      flush();
      jung_ = v;
      return;
    }
    if (cho_) {
      jung_ = v;
      return;
    }
    flush();
    jung_ = v;
  }

  std::u32string& out_;
  char32_t cho_ = 0, jung_ = 0, jong_ = 0;
};

}  // namespace

bool is_vowel_letter(char32_t ch) {
  switch (ch) {
    case U'ㅏ': case U'ㅐ': case U'ㅑ': case U'ㅒ': case U'ㅓ': case U'ㅔ': case U'ㅕ':
    case U'ㅖ': case U'ㅗ': case U'ㅛ': case U'ㅜ': case U'ㅠ': case U'ㅡ': case U'ㅣ':
      return true;
    default:
      return false;
  }
}

bool is_key_letter(char32_t ch) { return is_vowel_letter(ch) || cho_of(ch) >= 0; }

std::u32string to_letters(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size() * 3);
  for (char32_t ch : text) {
    if (is_syllable(ch)) {
      const auto d = decompose_syllable(ch);
      out += compat_of_cho(d.cho);
      append_split(out, compat_of_jung(d.jung));
      if (d.jong) append_split(out, compat_of_jong(d.jong));
    } else {
      append_split(out, ch);
    }
  }
  return out;
}

std::u32string compose_letters(std::u32string_view letters) {
  std::u32string out;
  out.reserve(letters.size());
  Composer c(out);
  for (char32_t ch : letters) c.feed(ch);
  c.flush();
  return out;
}

}  // namespace kombo::corruption
