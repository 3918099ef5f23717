// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kombo/nn/rng.hpp"

namespace kombo::objectives {

/// Sentences grouped into documents. In the corpus file a blank line ends a
/// document; malformed UTF-8 lines are dropped and counted.
struct Corpus {
  std::vector<std::vector<std::string>> documents;
  std::size_t skipped_lines = 0;

  static Corpus parse(std::istream& in);
  static Corpus load(const std::filesystem::path& path);
  std::size_t sentence_count() const;
};

struct NspPair {
  std::string a;
  std::string b;
  int label = 1;  // 1: b follows a in its document; 0: b comes from another document
};

class NspSampler {
 public:
  /// Throws NoData for a corpus without sentences.
  NspSampler(const Corpus& corpus, double negative_rate);

  /// Negatives need a second document. Without one every pair is positive.
  bool positive_only() const { return positive_only_; }

  /// Sentences that can open a pair: those with a successor in their
  /// document, or every sentence when no document has two.
  std::size_t anchor_count() const { return anchors_.size(); }
  /// Pair opened by one anchor; the label is drawn here.
  NspPair pair_at(std::size_t anchor, nn::Rng& rng) const;
  /// pair_at for a uniformly drawn anchor.
  NspPair sample(nn::Rng& rng) const;

 private:
  struct Loc {
    std::size_t doc, sent;
  };
  const Corpus* corpus_;
  double negative_rate_;
  bool positive_only_;
  std::vector<Loc> all_;
  std::vector<Loc> anchors_;
  bool has_successors_ = false;
};

}  // namespace kombo::objectives
