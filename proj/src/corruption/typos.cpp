// SPDX-License-Identifier: Apache-2.0
#include "kombo/corruption/typos.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "kombo/corruption/letters.hpp"
#include "kombo/error.hpp"
#include "kombo/hangul/utf8.hpp"
#include "kombo/nn/rng.hpp"

namespace kombo::corruption {
namespace {

constexpr TypoMethod kBasic[] = {TypoMethod::Insertion, TypoMethod::Transposition, TypoMethod::Substitution,
                                 TypoMethod::Deletion};

struct Edit {
  TypoMethod method;
  char32_t replacement = 0;  // neighbor used by Insertion and Substitution
};

bool applicable(TypoMethod m, std::size_t letter, std::size_t letters, char32_t ch, const KeyboardAdjacency& kb) {
  switch (m) {
    case TypoMethod::Insertion:
    case TypoMethod::Substitution:
      return kb.has_neighbors(ch);
    case TypoMethod::Transposition:
      return letter + 1 < letters;
    case TypoMethod::Deletion:
      return true;
    case TypoMethod::RandomMix:
      break;
  }
  return false;
}

}  // namespace

std::string to_string(TypoMethod m) {
  switch (m) {
    case TypoMethod::Insertion: return "insertion";
    case TypoMethod::Transposition: return "transposition";
    case TypoMethod::Substitution: return "substitution";
    case TypoMethod::Deletion: return "deletion";
    case TypoMethod::RandomMix: return "random_mix";
  }
  return "?";
}

TypoMethod parse_typo_method(std::string_view name) {
  for (TypoMethod m : {TypoMethod::Insertion, TypoMethod::Transposition, TypoMethod::Substitution,
                       TypoMethod::Deletion, TypoMethod::RandomMix}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::ConfigError, "unknown typo method '" + std::string(name) + "'");
}

void TypoSpec::validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error(ErrorKind::ConfigError, "typo rate must lie in [0, 1]");
}

std::size_t letter_count(std::string_view text) {
  const auto letters = to_letters(utf8::decode_or_throw(text));
  return static_cast<std::size_t>(std::count_if(letters.begin(), letters.end(), is_key_letter));
}

TypoResult inject_typos(std::string_view text, const TypoSpec& spec, const KeyboardAdjacency& kb) {
  spec.validate();
  std::u32string stream = to_letters(utf8::decode_or_throw(text));
  std::vector<std::size_t> where;  // stream index of each letter
  for (std::size_t i = 0; i < stream.size(); ++i)
    if (is_key_letter(stream[i])) where.push_back(i);
  const std::size_t n = where.size();

  TypoResult result;
  result.letters_before = n;
  const auto wanted = static_cast<std::size_t>(std::llround(spec.rate * static_cast<double>(n)));

  std::vector<std::size_t> eligible;
  for (std::size_t l = 0; l < n; ++l) {
    const char32_t ch = stream[where[l]];
    const bool ok = spec.method == TypoMethod::RandomMix
                        ? std::any_of(std::begin(kBasic), std::end(kBasic),
                                      [&](TypoMethod m) { return applicable(m, l, n, ch, kb); })
                        : applicable(spec.method, l, n, ch, kb);
    if (ok) eligible.push_back(l);
  }
  const std::size_t k = std::min(wanted, eligible.size());
  if (k == 0) {
    result.text = std::string(text);
    result.letters_after = n;
    return result;
  }

  nn::Rng rng(spec.seed);
  std::vector<std::optional<Edit>> edits(n);
  for (std::size_t pick : rng.sample_without_replacement(eligible.size(), k)) {
    const std::size_t l = eligible[pick];
    const char32_t ch = stream[where[l]];
    TypoMethod m = spec.method;
    if (m == TypoMethod::RandomMix) {
      std::vector<TypoMethod> options;
      for (TypoMethod b : kBasic)
        if (applicable(b, l, n, ch, kb)) options.push_back(b);
      m = options[rng.uniform_index(options.size())];
    }
    Edit e{m};
    if (m == TypoMethod::Insertion || m == TypoMethod::Substitution) {
      const auto& nbs = kb.neighbors(ch);
      e.replacement = nbs[rng.uniform_index(nbs.size())];
    }
    edits[l] = e;
  }

  // Swaps first, in ascending site order; the remaining edits then act on
  // whatever letter sits at their position.
  for (std::size_t l = 0; l < n; ++l) {
    if (edits[l] && edits[l]->method == TypoMethod::Transposition) {
      std::swap(stream[where[l]], stream[where[l + 1]]);
      ++result.transpositions;
    }
  }
  std::u32string out;
  out.reserve(stream.size() + k);
  std::size_t l = 0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (l >= n || where[l] != i) {
      out += stream[i];
      continue;
    }
    const auto& e = edits[l++];
    if (!e || e->method == TypoMethod::Transposition) {
      out += stream[i];
    } else if (e->method == TypoMethod::Deletion) {
      ++result.deletions;
    } else if (e->method == TypoMethod::Substitution) {
      out += e->replacement;
      ++result.substitutions;
    } else {
      out += stream[i];
      out += e->replacement;
      ++result.insertions;
    }
  }
  result.text = utf8::encode(compose_letters(out));
  result.letters_after = n + result.insertions - result.deletions;
  return result;
}

std::uint64_t line_seed(std::uint64_t seed, double rate, std::size_t line) {
  const auto rate_key = static_cast<std::uint64_t>(std::llround(rate * 1e6));
  return nn::hash_combine(nn::hash_combine(seed, rate_key), line);
}

SweepResult sweep_rates(const std::vector<std::string>& lines, TypoMethod method, const std::vector<double>& rates,
                        std::uint64_t seed, const KeyboardAdjacency& kb) {
  if (!std::is_sorted(rates.begin(), rates.end())) throw Error(ErrorKind::ConfigError, "sweep rates must ascend");
  SweepResult sweep{method, seed, {}};
  for (double rate : rates) {
    SweepEntry entry{rate, {}, 0};
    entry.lines.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto r = inject_typos(lines[i], {method, rate, line_seed(seed, rate, i)}, kb);
      entry.letter_edits += r.edits();
      entry.lines.push_back(std::move(r.text));
    }
    sweep.entries.push_back(std::move(entry));
  }
  return sweep;
}

nlohmann::json SweepResult::manifest() const {
  auto out = nlohmann::json::array();
  for (const auto& e : entries) {
    out.push_back({{"rate", e.rate},
                   {"method", to_string(method)},
                   {"seed", seed},
                   {"lines", e.lines.size()},
                   {"letter_edits", e.letter_edits}});
  }
  return out;
}

std::vector<double> default_sweep_rates() {
  std::vector<double> r;
  for (int i = 0; i <= 8; ++i) r.push_back(i / 20.0);
  return r;
}

}  // namespace kombo::corruption
