// SPDX-License-Identifier: Apache-2.0
#include "kombo/hangul/unit_scheme.hpp"

#include "kombo/error.hpp"

namespace kombo::hangul {

UnitScheme UnitScheme::of(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Jamo: return {kind, 3, 1, 1, 1};
    case SchemeKind::Stroke: return {kind, 9, 4, 1, 4};
    case SchemeKind::Cji: return {kind, 7, 1, 5, 1};
    case SchemeKind::Bts: return {kind, 13, 4, 5, 4};
    case SchemeKind::Character: return {kind, 1, 1, 0, 0};
  }
  throw Error(ErrorKind::ConfigError, "unknown scheme kind");
}

UnitScheme UnitScheme::parse(std::string_view name) {
  if (name == "jamo") return of(SchemeKind::Jamo);
  if (name == "stroke") return of(SchemeKind::Stroke);
  if (name == "cji") return of(SchemeKind::Cji);
  if (name == "bts") return of(SchemeKind::Bts);
  if (name == "char" || name == "character") return of(SchemeKind::Character);
  throw Error(ErrorKind::ConfigError, "unknown scheme '" + std::string(name) + "'");
}

std::string UnitScheme::name() const {
  switch (kind) {
    case SchemeKind::Jamo: return "jamo";
    case SchemeKind::Stroke: return "stroke";
    case SchemeKind::Cji: return "cji";
    case SchemeKind::Bts: return "bts";
    case SchemeKind::Character: return "char";
  }
  return "unknown";
}

}  // namespace kombo::hangul
