// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "nie/geom/types.hpp"

namespace nie::geom {

/// A corrupted cloud plus, for each kept point, its index in the input.
struct CorruptedCloud {
  PointCloud cloud;
  IndexList kept;
};

/// Keeps the points on the camera side (+view_axis) of the plane through the
/// centroid orthogonal to view_axis.
CorruptedCloud corrupt_half(const PointCloud& cloud, const Eigen::Vector3d& view_axis);

/// Removes the n_remove nearest points around each of n_centers FPS centers;
/// the FPS start point is drawn from the seed.
CorruptedCloud corrupt_hole(const PointCloud& cloud, Index n_centers, Index n_remove,
                            std::uint64_t seed);

/// Removes the geodesic ball around a random extremal point that covers
/// `extremity_fraction` of the points. Geodesics come from the k-NN graph
/// unless supplied.
CorruptedCloud corrupt_cut(const PointCloud& cloud, double extremity_fraction, std::uint64_t seed);
CorruptedCloud corrupt_cut(const PointCloud& cloud, const GeodesicMatrix& geo,
                           double extremity_fraction, std::uint64_t seed);

/// Zero-mean Gaussian displacement per coordinate with standard deviation
/// sigma_rel times the bounding-box diagonal.
PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma_rel, std::uint64_t seed);

}  // namespace nie::geom
