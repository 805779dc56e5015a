// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "nie/fmap/fmap.hpp"
#include "nie/geom/types.hpp"

namespace nie::eval {

// Metrics are returned on the x1 scale; multiply by 100 only when reporting.

/// Mean over source points of d_target(pred(p), gt(p)).
double mean_geodesic_error(const fmap::PointMap& pred, const fmap::PointMap& gt,
                           const geom::GeodesicMatrix& geo_target);

/// Mean over all pairs p < q with d_S > floor of (d_E - d_S)^2 / d_S^2.
double relative_embedding_error(const Mat& phi, const geom::GeodesicMatrix& geo,
                                double floor = 1e-4);

/// Encode the ground-truth map gt: Y -> X into phi, decode it back and
/// measure the geodesic error on X.
double opt_metric(const Mat& phi_x, const Mat& phi_y, const fmap::PointMap& gt,
                  const geom::GeodesicMatrix& geo_x);

struct MdsResult {
  Mat embedding;             // n x k
  IndexList points;          // rows of the input used (identity unless capped)
  Index positive_dims = 0;   // eigenpairs with a positive eigenvalue
  std::vector<std::string> warnings;
};

/// Classical (Torgerson) scaling of the distance matrix. Inputs above
/// `cap` points are reduced by FPS first.
MdsResult mds_classical(const geom::GeodesicMatrix& geo, Index k, Index cap = 1500);

/// Centred coordinates scaled to unit RMS row norm.
Mat euclidean_baseline(const geom::PointCloud& cloud);

/// Label of each point = position of its nearest landmark in phi.
IndexList landmark_segmentation(const Mat& phi, const IndexList& landmarks);

/// Same labelling from geodesic distances.
IndexList geodesic_segmentation(const geom::GeodesicMatrix& geo, const IndexList& landmarks);

double agreement(const IndexList& a, const IndexList& b);

}  // namespace nie::eval
