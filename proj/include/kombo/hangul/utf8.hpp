// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kombo::utf8 {

/// Decodes UTF-8; returns nullopt on any malformed or overlong sequence.
std::optional<std::u32string> decode(std::string_view text);

/// Decodes UTF-8 or throws Error(ParseError).
std::u32string decode_or_throw(std::string_view text);

std::string encode(char32_t cp);
std::string encode(std::u32string_view text);

/// Splits on a single-character separator; empty fields are kept.
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace kombo::utf8
