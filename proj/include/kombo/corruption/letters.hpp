// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace kombo::corruption {

/// One of the 33 dubeolsik keys: 19 consonants (doubles included) and 14
/// simple vowels, as compatibility jamo.
bool is_key_letter(char32_t ch);
bool is_vowel_letter(char32_t ch);

/// Keystroke stream of a text. Syllables become their keys in typing order,
/// compound vowels and final clusters are split into two keys, and any other
/// character is copied through.
std::u32string to_letters(std::u32string_view text);

/// Greedy left-to-right dubeolsik composition. Letters that cannot join a
/// syllable stay standalone. to_letters(compose_letters(s)) == s for any s
/// returned by to_letters.
std::u32string compose_letters(std::u32string_view letters);

}  // namespace kombo::corruption
