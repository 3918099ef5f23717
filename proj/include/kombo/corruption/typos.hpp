// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kombo/corruption/keyboard.hpp"

namespace kombo::corruption {

enum class TypoMethod { Insertion, Transposition, Substitution, Deletion, RandomMix };

std::string to_string(TypoMethod m);
/// Accepts the lower-case names ("insertion", ..., "random_mix"); ConfigError otherwise.
TypoMethod parse_typo_method(std::string_view name);

struct TypoSpec {
  TypoMethod method = TypoMethod::RandomMix;
  double rate = 0.0;  // fraction of keyboard letters edited
  std::uint64_t seed = 0;

  void validate() const;
};

struct TypoResult {
  std::string text;
  std::size_t letters_before = 0;
  std::size_t letters_after = 0;
  std::size_t insertions = 0;
  std::size_t transpositions = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;

  std::size_t edits() const { return insertions + transpositions + substitutions + deletions; }
};

/// Number of keyboard letters in the keystroke stream of `text`.
std::size_t letter_count(std::string_view text);

/// Edits round(rate * letters) sites on the keystroke stream, then recomposes.
/// Sites are letters only; whitespace and other characters are never edited.
/// Insertion and Substitution only pick letters that have neighbors, and
/// Transposition never picks the last letter. Zero sites returns the input
/// unchanged. Throws ParseError on malformed UTF-8.
TypoResult inject_typos(std::string_view text, const TypoSpec& spec,
                        const KeyboardAdjacency& kb = KeyboardAdjacency::builtin());

struct SweepEntry {
  double rate = 0.0;
  std::vector<std::string> lines;
  std::size_t letter_edits = 0;
};

struct SweepResult {
  TypoMethod method;
  std::uint64_t seed = 0;
  std::vector<SweepEntry> entries;

  /// [{rate, method, seed, lines, letter_edits}, ...]
  nlohmann::json manifest() const;
};

/// Seed for one line of one corpus copy.
std::uint64_t line_seed(std::uint64_t seed, double rate, std::size_t line);

/// One corrupted copy of `lines` per rate. Rates must ascend within [0, 1].
SweepResult sweep_rates(const std::vector<std::string>& lines, TypoMethod method, const std::vector<double>& rates,
                        std::uint64_t seed, const KeyboardAdjacency& kb = KeyboardAdjacency::builtin());

/// 0, 0.05, ..., 0.40.
std::vector<double> default_sweep_rates();

}  // namespace kombo::corruption
