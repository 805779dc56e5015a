// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/common/linalg.hpp"

#include <cmath>
#include <numeric>

#include "nie/common/error.hpp"

namespace nie {

Mat take_rows(const Mat& m, const IndexList& rows) {
  Mat out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < m.rows(), ErrorCode::kSize, "take_rows: index out of range");
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  return out;
}

Mat take_block(const Mat& m, const IndexList& rows) {
  const auto n = static_cast<Index>(rows.size());
  Mat out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out(i, j) = m(rows[i], rows[j]);
  }
  return out;
}

Mat pairwise_distances(const Mat& a, const Mat& b) {
  require(a.cols() == b.cols(), ErrorCode::kShape, "pairwise_distances: column mismatch");
  Mat out(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) out(i, j) = (a.row(i) - b.row(j)).norm();
  }
  return out;
}

Vec singular_values(const Mat& m) {
  const Eigen::MatrixXd dense = m;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
  return svd.singularValues();
}

double rank_ratio(const Mat& m) {
  const Vec s = singular_values(m);
  if (s.size() == 0 || s(0) <= 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

IndexList iota_indices(Index n) {
  IndexList out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), Index{0});
  return out;
}

}  // namespace nie
