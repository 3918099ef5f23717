// SPDX-License-Identifier: Apache-2.0
#include "kombo/hangul/jamo.hpp"

#include <array>
#include <string>

#include "kombo/error.hpp"

namespace kombo::hangul {
namespace {

constexpr char32_t kChoseongBase = 0x1100;
constexpr char32_t kJungseongBase = 0x1161;
constexpr char32_t kJongseongBase = 0x11A8;  // jong index 1

constexpr std::array<char32_t, kChoCount> kCompatCho = {
    0x3131, 0x3132, 0x3134, 0x3137, 0x3138, 0x3139, 0x3141, 0x3142, 0x3143, 0x3145,
    0x3146, 0x3147, 0x3148, 0x3149, 0x314A, 0x314B, 0x314C, 0x314D, 0x314E};

constexpr std::array<char32_t, kJongCount - 1> kCompatJong = {
    0x3131, 0x3132, 0x3133, 0x3134, 0x3135, 0x3136, 0x3137, 0x3139, 0x313A,
    0x313B, 0x313C, 0x313D, 0x313E, 0x313F, 0x3140, 0x3141, 0x3142, 0x3144,
    0x3145, 0x3146, 0x3147, 0x3148, 0x314A, 0x314B, 0x314C, 0x314D, 0x314E};

void check_index(int value, int lo, int hi, const char* what) {
  if (value < lo || value > hi) {
    throw Error(ErrorKind::InvalidJamoIndex,
                std::string(what) + " index " + std::to_string(value) + " outside [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

SyllableDecomposition decompose_syllable(char32_t ch) {
  if (!is_syllable(ch)) {
    throw Error(ErrorKind::NotHangulSyllable,
                "U+" + std::to_string(static_cast<unsigned long>(ch)) + " is not a precomposed syllable");
  }
  const int offset = static_cast<int>(ch - kSyllableFirst);
  return {offset / (kJungCount * kJongCount), (offset / kJongCount) % kJungCount,
          offset % kJongCount};
}

char32_t compose_syllable(const SyllableDecomposition& d) {
  check_index(d.cho, 0, kChoCount - 1, "chosung");
  check_index(d.jung, 0, kJungCount - 1, "joongsung");
  check_index(d.jong, 0, kJongCount - 1, "jongsung");
  return kSyllableFirst +
         static_cast<char32_t>((d.cho * kJungCount + d.jung) * kJongCount + d.jong);
}

char32_t choseong(int cho) {
  check_index(cho, 0, kChoCount - 1, "chosung");
  return kChoseongBase + static_cast<char32_t>(cho);
}

char32_t jungseong(int jung) {
  check_index(jung, 0, kJungCount - 1, "joongsung");
  return kJungseongBase + static_cast<char32_t>(jung);
}

char32_t jongseong(int jong) {
  check_index(jong, 1, kJongCount - 1, "jongsung");
  return kJongseongBase + static_cast<char32_t>(jong - 1);
}

int choseong_index(char32_t ch) {
  return ch >= kChoseongBase && ch < kChoseongBase + kChoCount
             ? static_cast<int>(ch - kChoseongBase)
             : -1;
}

int jungseong_index(char32_t ch) {
  return ch >= kJungseongBase && ch < kJungseongBase + kJungCount
             ? static_cast<int>(ch - kJungseongBase)
             : -1;
}

int jongseong_index(char32_t ch) {
  return ch >= kJongseongBase && ch < kJongseongBase + kJongCount - 1
             ? static_cast<int>(ch - kJongseongBase) + 1
             : -1;
}

char32_t compat_of_cho(int cho) {
  check_index(cho, 0, kChoCount - 1, "chosung");
  return kCompatCho[static_cast<std::size_t>(cho)];
}

char32_t compat_of_jung(int jung) {
  check_index(jung, 0, kJungCount - 1, "joongsung");
  return 0x314F + static_cast<char32_t>(jung);
}

char32_t compat_of_jong(int jong) {
  check_index(jong, 1, kJongCount - 1, "jongsung");
  return kCompatJong[static_cast<std::size_t>(jong - 1)];
}

bool is_compat_jamo(char32_t ch) { return ch >= 0x3131 && ch <= 0x3163; }

CharClass classify_char(char32_t ch) {
  if (is_syllable(ch)) return CharClass::HangulSyllable;
  if (ch < 0x80) {
    const bool punct = (ch >= 0x21 && ch <= 0x2F) || (ch >= 0x3A && ch <= 0x40) ||
                       (ch >= 0x5B && ch <= 0x60) || (ch >= 0x7B && ch <= 0x7E);
    return punct ? CharClass::Punct : CharClass::Ascii;
  }
  if ((ch >= 0x00A1 && ch <= 0x00BF) || (ch >= 0x2010 && ch <= 0x2027) ||
      (ch >= 0x2030 && ch <= 0x205E) || (ch >= 0x3001 && ch <= 0x3003) ||
      (ch >= 0x3008 && ch <= 0x3011) || (ch >= 0x3014 && ch <= 0x301F) ||
      (ch >= 0xFF01 && ch <= 0xFF0F) || (ch >= 0xFF1A && ch <= 0xFF20) ||
      (ch >= 0xFF3B && ch <= 0xFF40) || (ch >= 0xFF5B && ch <= 0xFF65)) {
    return CharClass::Punct;
  }
  return CharClass::Other;
}

}  // namespace kombo::hangul
