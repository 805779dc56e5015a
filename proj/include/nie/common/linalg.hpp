// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace nie {

using Index = Eigen::Index;

/// Row-major dense matrix; rows are points throughout the library.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexMat = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using IndexList = std::vector<Index>;

/// Rows of `m` selected by `rows`, in that order.
Mat take_rows(const Mat& m, const IndexList& rows);

/// Square submatrix m[rows, rows].
Mat take_block(const Mat& m, const IndexList& rows);

/// All pairwise Euclidean distances between rows of a and rows of b.
Mat pairwise_distances(const Mat& a, const Mat& b);

/// Singular values of m in descending order.
Vec singular_values(const Mat& m);

/// sigma_min / sigma_max of the columns of m; 0 for an all-zero matrix.
double rank_ratio(const Mat& m);

IndexList iota_indices(Index n);

}  // namespace nie
