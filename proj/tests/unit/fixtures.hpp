// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nie/common/random.hpp"
#include "nie/geom/geometry.hpp"
#include "nie/geom/types.hpp"

namespace nie::testing {

inline Mat random_matrix(Index rows, Index cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = uniform_real(rng, lo, hi);
  return m;
}

inline geom::PointCloud cloud_from(Mat positions) {
  geom::PointCloud c;
  c.positions = std::move(positions);
  return c;
}

/// Intrinsic features: geodesic distance to each landmark. Identical on
/// isometric shapes under the correspondence, and generically full rank.
inline Mat landmark_features(const geom::GeodesicMatrix& geo, const IndexList& landmarks) {
  Mat f(geo.size(), static_cast<Index>(landmarks.size()));
  for (std::size_t l = 0; l < landmarks.size(); ++l) f.col(static_cast<Index>(l)) = geo.dist.col(landmarks[l]);
  return f;
}

inline Mat random_rotation(Index k, std::uint64_t seed) {
  const Mat a = random_matrix(k, k, seed);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(a)};
  return Mat(qr.householderQ());
}

}  // namespace nie::testing
