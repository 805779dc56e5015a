// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/common/random.hpp"

#include <cmath>
#include <numbers>
#include <unordered_set>
#include <utility>

namespace nie {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Index uniform_index(Rng& rng, Index n) {
  // Rejection sampling keeps the draw portable across standard libraries.
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = Rng::max() - Rng::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<Index>(x % bound);
}

double uniform_real(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double standard_normal(Rng& rng) {
  double u1 = uniform_real(rng, 0.0, 1.0);
  while (u1 <= 0.0) u1 = uniform_real(rng, 0.0, 1.0);
  const double u2 = uniform_real(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void shuffle_indices(IndexList& indices, Rng& rng) {
  for (Index i = static_cast<Index>(indices.size()) - 1; i > 0; --i) {
    std::swap(indices[static_cast<std::size_t>(i)],
              indices[static_cast<std::size_t>(uniform_index(rng, i + 1))]);
  }
}

IndexList sample_without_replacement(Index n, Index count, Rng& rng) {
  if (count * 4 >= n) {
    IndexList all = iota_indices(n);
    shuffle_indices(all, rng);
    all.resize(static_cast<std::size_t>(count));
    return all;
  }
  IndexList out;
  out.reserve(static_cast<std::size_t>(count));
  std::unordered_set<Index> seen;
  while (static_cast<Index>(out.size()) < count) {
    const Index i = uniform_index(rng, n);
    if (seen.insert(i).second) out.push_back(i);
  }
  return out;
}

}  // namespace nie
