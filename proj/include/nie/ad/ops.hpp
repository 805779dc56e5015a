// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "nie/ad/tape.hpp"

namespace nie::ad {

// Shapes are (rows, cols). Binary elementwise ops accept a right operand of the
// same shape, a 1 x cols row (broadcast over rows) or a 1 x 1 scalar.

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

Var scale(Var a, double s);
Var add_scalar(Var a, double s);

/// Concatenation along axis 0 (stack rows) or axis 1 (side by side).
Var concat(const std::vector<Var>& parts, int axis);

/// Rows [start, start + count).
Var slice_rows(Var a, Index start, Index count);

/// out.row(i) = a.row(rows[i]); gradients scatter-add back.
Var gather_rows(Var a, const IndexList& rows);

struct MaxResult {
  Var value;
  IndexMat argmax;
};

/// Maximum over axis 0 (-> 1 x cols) or axis 1 (-> rows x 1). Ties keep the
/// lowest index; the gradient is one-hot at the argmax.
MaxResult max_over_axis(Var a, int axis);

/// Input rows are grouped in consecutive blocks of `group`; returns the
/// per-column maximum of each block (rows / group x cols).
MaxResult max_over_groups(Var a, Index group);

Var leaky_relu(Var a, double slope = 0.2);
Var exp(Var a);
Var log(Var a);

Var softmax_rows(Var a);

/// Row-wise log-softmax. Entries with mask(i, j) == 0 are excluded from the
/// normalization and produce 0 with no gradient. An empty mask keeps all.
Var log_softmax_rows(Var a, const Matrix& mask = {});

Var sum(Var a);
Var mean(Var a);

/// Sum of squared entries (1 x 1).
Var squared_norm(Var a);

/// Euclidean norm of each row (rows x 1). The gradient at a zero row is 0.
Var row_norm(Var a);

/// d(i, j) = ||a.row(i) - b.row(j)||_2. The gradient at coincident rows is 0.
Var distance_matrix(Var a, Var b);

/// Solves sym(s) x = b with sym(s) = (s + s^T) / 2 by Cholesky. Throws
/// ErrorCode::kNumeric if sym(s) is not positive definite.
Var cholesky_solve(Var s, Var b);

/// Identity of size n as a constant on the given tape.
Var identity(Tape& tape, Index n);

}  // namespace nie::ad
