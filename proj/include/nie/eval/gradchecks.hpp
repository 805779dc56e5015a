// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "nie/ad/gradcheck.hpp"

namespace nie::eval {

/// End-to-end finite-difference checks on seeded toy instances: the NIE
/// training loss and the descriptor loss, each with respect to the network
/// parameters that produce its inputs.
std::vector<ad::GradCheckResult> loss_gradchecks(std::uint64_t seed, double tolerance = 1e-3);

}  // namespace nie::eval
