// SPDX-License-Identifier: Apache-2.0
#include "kombo/objectives/nsp.hpp"

#include <fstream>
#include <istream>

#include "kombo/error.hpp"
#include "kombo/hangul/utf8.hpp"

namespace kombo::objectives {

Corpus Corpus::parse(std::istream& in) {
  Corpus c;
  std::vector<std::string> doc;
  std::string line;
  auto flush = [&] {
    if (!doc.empty()) c.documents.push_back(std::move(doc));
    doc.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!utf8::decode(line)) {
      ++c.skipped_lines;
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    doc.push_back(line);
  }
  flush();
  return c;
}

Corpus Corpus::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open corpus " + path.string());
  return parse(in);
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.size();
  return n;
}

NspSampler::NspSampler(const Corpus& corpus, double negative_rate)
    : corpus_(&corpus), negative_rate_(negative_rate), positive_only_(corpus.documents.size() < 2) {
  if (negative_rate < 0.0 || negative_rate > 1.0) throw Error(ErrorKind::ConfigError, "negative rate outside [0, 1]");
  std::vector<Loc> with_successor;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    for (std::size_t s = 0; s < corpus.documents[d].size(); ++s) {
      all_.push_back({d, s});
      if (s + 1 < corpus.documents[d].size()) with_successor.push_back({d, s});
    }
  }
  if (all_.empty()) throw Error(ErrorKind::NoData, "corpus has no sentences");
  has_successors_ = !with_successor.empty();
  anchors_ = has_successors_ ? std::move(with_successor) : all_;
}

NspPair NspSampler::pair_at(std::size_t anchor, nn::Rng& rng) const {
  const auto& docs = corpus_->documents;
  const Loc a = anchors_.at(anchor);
  if (!positive_only_ && rng.bernoulli(negative_rate_)) {
    Loc b = all_[rng.uniform_index(all_.size())];
    while (b.doc == a.doc) b = all_[rng.uniform_index(all_.size())];
    return {docs[a.doc][a.sent], docs[b.doc][b.sent], 0};
  }
  // Without any two-sentence document the successor of a lone sentence is empty.
  if (!has_successors_) return {docs[a.doc][a.sent], std::string(), 1};
  return {docs[a.doc][a.sent], docs[a.doc][a.sent + 1], 1};
}

NspPair NspSampler::sample(nn::Rng& rng) const { return pair_at(rng.uniform_index(anchors_.size()), rng); }

}  // namespace kombo::objectives
