// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>

namespace kombo::hangul {

inline constexpr char32_t kSyllableFirst = 0xAC00;
inline constexpr char32_t kSyllableLast = 0xD7A3;
inline constexpr int kChoCount = 19;
inline constexpr int kJungCount = 21;
inline constexpr int kJongCount = 28;  // index 0 is the absent final
inline constexpr int kSyllableCount = kChoCount * kJungCount * kJongCount;

/// Index triple of one precomposed syllable. `jong == 0` means no final
/// consonant.
struct SyllableDecomposition {
  int cho = 0;
  int jung = 0;
  int jong = 0;

  friend auto operator<=>(const SyllableDecomposition&, const SyllableDecomposition&) = default;
};

constexpr bool is_syllable(char32_t ch) { return ch >= kSyllableFirst && ch <= kSyllableLast; }

/// Throws Error(NotHangulSyllable) outside U+AC00..U+D7A3.
SyllableDecomposition decompose_syllable(char32_t ch);

/// Throws Error(InvalidJamoIndex) for out-of-range indices.
char32_t compose_syllable(const SyllableDecomposition& d);

// Conjoining (positional) jamo. Initial and final forms of the same letter are
// different code points, which keeps their roles apart in a vocabulary.
char32_t choseong(int cho);
char32_t jungseong(int jung);
char32_t jongseong(int jong);  // jong in 1..27

/// Inverse of the positional helpers; -1 when `ch` is not of that class.
int choseong_index(char32_t ch);
int jungseong_index(char32_t ch);
int jongseong_index(char32_t ch);

// Compatibility jamo (U+3131..U+3163), the form a keyboard produces.
char32_t compat_of_cho(int cho);
char32_t compat_of_jung(int jung);
char32_t compat_of_jong(int jong);  // jong in 1..27
bool is_compat_jamo(char32_t ch);

enum class CharClass { HangulSyllable, Ascii, Punct, Other };

CharClass classify_char(char32_t ch);

}  // namespace kombo::hangul
