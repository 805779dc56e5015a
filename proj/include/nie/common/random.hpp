// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "nie/common/linalg.hpp"

namespace nie {

using Rng = std::mt19937_64;

/// Derives an independent stream from a base seed and a salt (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

/// Uniform index in [0, n).
Index uniform_index(Rng& rng, Index n);

/// Uniform double in [lo, hi) from the top 53 bits of one draw.
double uniform_real(Rng& rng, double lo, double hi);

/// Standard normal via Box-Muller on two uniform_real draws.
double standard_normal(Rng& rng);

/// Fisher-Yates shuffle driven by uniform_index, so the permutation depends
/// only on the generator state.
void shuffle_indices(IndexList& indices, Rng& rng);

/// `count` distinct indices out of [0, n), in random order.
IndexList sample_without_replacement(Index n, Index count, Rng& rng);

}  // namespace nie
