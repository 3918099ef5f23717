// SPDX-License-Identifier: Apache-2.0
#include "kombo/harness/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "kombo/error.hpp"
#include "kombo/hangul/utf8.hpp"

namespace kombo::harness {

std::string to_string(ProbeSource s) { return s == ProbeSource::StaticEmbedding ? "static" : "kombo"; }

ProbeSource parse_probe_source(const std::string& name) {
  if (name == "static") return ProbeSource::StaticEmbedding;
  if (name == "kombo") return ProbeSource::ContextualKombo;
  throw Error(ErrorKind::ConfigError, "probe source must be 'static' or 'kombo', not '" + name + "'");
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

std::string ProbeReport::to_csv() const {
  std::string out = "anchor";
  for (const auto& c : characters) out += "," + c;
  out += "\n";
  char buf[32];
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    out += anchors[a];
    for (double v : cosine[a]) {
      std::snprintf(buf, sizeof buf, ",%.6f", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

ProbeReport probe_similarity(const model::KomboModel<float>& m, const tokenizer::Tokenizer& tok,
                             const std::string& sentence, const std::vector<std::string>& anchors,
                             ProbeSource source) {
  const auto& cfg = m.config();
  const auto tpc = static_cast<std::size_t>(tok.tokens_per_char());
  const auto seq = tok.encode(sentence, {cfg.max_len, true});
  const std::size_t chars = seq.spans.size() - 2;  // without CLS and SEP
  const std::u32string text = utf8::decode_or_throw(sentence);

  ProbeReport r;
  r.sentence = sentence;
  r.anchors = anchors;
  r.source = source;
  for (std::size_t c = 0; c < chars; ++c) r.characters.push_back(utf8::encode(text[c]));

  const std::size_t d = cfg.d_model;
  std::vector<std::vector<double>> vecs(chars, std::vector<double>(d, 0.0));
  if (source == ProbeSource::StaticEmbedding) {
    const auto* table = m.params().find("embed.token");
    const auto& w = table->var.value();
    for (std::size_t c = 0; c < chars; ++c) {
      const auto& sp = seq.spans[c + 1];
      for (std::size_t i = 0; i < sp.len; ++i) {
        const auto row = static_cast<std::size_t>(seq.ids[sp.start + i]);
        for (std::size_t k = 0; k < d; ++k) vecs[c][k] += w.at(row, k);
      }
    }
  } else {
    const auto out = m.forward({seq.ids, 1, seq.ids.size()});
    const auto& h = out.h_c_prime.value();  // [1, M, D]
    // Without merging the stack runs per subcharacter; sum each span.
    const std::size_t per_char = h.dim(1) == seq.spans.size() ? 1 : tpc;
    for (std::size_t c = 0; c < chars; ++c) {
      for (std::size_t i = 0; i < per_char; ++i) {
        const std::size_t row = (c + 1) * per_char + i;
        for (std::size_t k = 0; k < d; ++k) vecs[c][k] += h.at(0, row, k);
      }
    }
  }

  for (const auto& anchor : anchors) {
    const auto it = std::find(r.characters.begin(), r.characters.end(), anchor);
    if (it == r.characters.end()) {
      throw Error(ErrorKind::AnchorNotFound, "'" + anchor + "' is not a character of the probed sentence");
    }
    const auto& av = vecs[static_cast<std::size_t>(it - r.characters.begin())];
    std::vector<double> row;
    row.reserve(chars);
    for (const auto& v : vecs) row.push_back(cosine(av, v));
    r.cosine.push_back(std::move(row));
  }
  return r;
}

}  // namespace kombo::harness
