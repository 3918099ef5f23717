// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace kombo::hangul {

enum class SchemeKind { Jamo, Stroke, Cji, Bts, Character };

/// Fixed slot layout of one character under a subcharacter scheme. Every
/// character occupies `tokens_per_char` consecutive positions: first the
/// initial-consonant group, then the vowel group, then the final group.
struct UnitScheme {
  SchemeKind kind = SchemeKind::Jamo;
  int tokens_per_char = 3;
  int cho_slots = 1;
  int jung_slots = 1;
  int jong_slots = 1;

  static UnitScheme of(SchemeKind kind);
  static UnitScheme parse(std::string_view name);  // jamo|stroke|cji|bts|char

  std::string name() const;
  bool is_subcharacter() const { return kind != SchemeKind::Character; }
  int cho_begin() const { return 0; }
  int jung_begin() const { return cho_slots; }
  int jong_begin() const { return cho_slots + jung_slots; }

  friend bool operator==(const UnitScheme&, const UnitScheme&) = default;
};

}  // namespace kombo::hangul
