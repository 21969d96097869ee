#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace techtrace {

// Engine for every stochastic step. Draws go through the helpers below rather
// than <random> distributions, whose outputs differ between standard libraries.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a key path,
// e.g. derive_seed(seed, {epoch, kind, entity, year}).
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ull));
  return h;
}

// Uniform in [0, 1).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Uniform integer in [0, n), rejection sampled. n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Index drawn proportionally to non-negative weights; -1 if all are zero.
inline int categorical(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) return -1;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = static_cast<int>(k);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

// min(k, pool.size()) distinct elements of pool via partial Fisher-Yates.
inline std::vector<int> sample_without_replacement(std::span<const int> pool, int k, Rng& rng) {
  std::vector<int> items(pool.begin(), pool.end());
  const std::size_t take = std::min<std::size_t>(items.size(), k < 0 ? 0 : static_cast<std::size_t>(k));
  if (take == items.size()) return items;
  for (std::size_t a = 0; a < take; ++a) {
    const std::size_t b = a + uniform_index(rng, items.size() - a);
    std::swap(items[a], items[b]);
  }
  items.resize(take);
  return items;
}

}  // namespace techtrace
