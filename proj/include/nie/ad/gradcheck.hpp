// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nie/ad/tape.hpp"

namespace nie::ad {

/// Builds a scalar (1x1) loss from trainable inputs recorded on `tape`.
using ScalarFn = std::function<Var(Tape& tape, const std::vector<Var>& inputs)>;

struct GradCheckResult {
  std::string name;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Compares reverse-mode gradients of `fn` against central differences with
/// step h. Returns ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-10)
/// over all inputs stacked together.
double gradient_error(const ScalarFn& fn, const std::vector<Matrix>& inputs, double h = 1e-5);

/// Wraps a matrix-valued op as the scalar sum(op(x) * R) with a fixed random R.
ScalarFn project_output(std::function<Var(Tape&, const std::vector<Var>&)> op, Index rows,
                        Index cols, std::uint64_t seed);

/// Finite-difference check of every registered op on seeded 5x7 instances.
std::vector<GradCheckResult> check_ops(std::uint64_t seed, double tolerance = 1e-4);

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

}  // namespace nie::ad
