// SPDX-License-Identifier: Apache-2.0
#include "kombo/nn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kombo/error.hpp"

namespace kombo::nn {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ mix64(value + 0x632BE59BD9B4E019ull));
}

Rng::Rng(std::uint64_t seed) : key_(mix64(seed)) {}

std::uint64_t Rng::next_u64() {
  // SplitMix64 is itself a counter mode: state = key + i * gamma.
  return mix64(key_ + 0x9E3779B97F4A7C15ull * counter_++);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::ConfigError, "uniform_index(0)");
  const std::uint64_t bound = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::truncated_normal(double sd) {
  double z = normal();
  while (std::fabs(z) > 2.0) z = normal();
  return z * sd;
}

Rng Rng::split(std::uint64_t stream) const { return Rng(hash_combine(key_, stream), 0, true); }

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw Error(ErrorKind::ConfigError, "cannot draw " + std::to_string(k) + " of " + std::to_string(n));
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace kombo::nn
