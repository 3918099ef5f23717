// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace kombo::harness {

struct ToyCorpusOptions {
  std::size_t target_bytes = 1'000'000;
  std::uint64_t seed = 0;
};

/// Synthetic Korean text: short documents, one sentence per line, blank line
/// between documents. Sentences come from a small grammar in which case
/// particles follow the final consonant of the word before them and each
/// document keeps one subject and tense, so there is something to learn for
/// both MLM and NSP. Output stops at the first document boundary past
/// target_bytes.
std::string generate_toy_corpus(const ToyCorpusOptions& options = {});

/// 은/는, 이/가, 을/를, 와/과 and 으로/로 picked by the last syllable of `word`.
std::string with_particle(const std::string& word, const std::string& after_consonant,
                          const std::string& after_vowel);

}  // namespace kombo::harness
