// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace kombo::nn {

/// Counter-based generator: the i-th draw is a fixed mixing function of
/// (key, i), so a stream is reproducible on every platform and `split`
/// derives independent child streams without advancing the parent.
///
/// Integer draws are bit-exact everywhere. `normal()` goes through libm and is
/// only guaranteed identical on one platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [0, n); n must be positive. Unbiased (rejection sampling).
  std::size_t uniform_index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  /// Normal(0, sd) resampled until |x| <= 2 sd.
  double truncated_normal(double sd);

  Rng split(std::uint64_t stream) const;
  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  template <typename Seq>
  void shuffle(Seq& seq) {
    for (std::size_t i = seq.size(); i > 1; --i) {
      using std::swap;
      swap(seq[i - 1], seq[uniform_index(i)]);
    }
  }

  /// k distinct values from [0, n) in increasing order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  Rng(std::uint64_t key, std::uint64_t counter, bool) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer; also used to derive seeds from tuples.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);

}  // namespace kombo::nn
