// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/geom/corrupt.hpp"

#include <algorithm>
#include <cmath>

#include "nie/common/error.hpp"
#include "nie/common/random.hpp"
#include "nie/geom/geometry.hpp"

namespace nie::geom {

namespace {

CorruptedCloud keep_unmasked(const PointCloud& cloud, const std::vector<char>& removed,
                             const char* what) {
  CorruptedCloud out;
  for (Index i = 0; i < cloud.size(); ++i) {
    if (!removed[static_cast<std::size_t>(i)]) out.kept.push_back(i);
  }
  require(out.kept.size() >= 4, ErrorCode::kSize, std::string(what) + ": too few points remain");
  out.cloud = cloud;
  out.cloud.positions = take_rows(cloud.positions, out.kept);
  return out;
}

}  // namespace

CorruptedCloud corrupt_half(const PointCloud& cloud, const Eigen::Vector3d& view_axis) {
  require(view_axis.norm() > 0.0, ErrorCode::kDegenerateInput, "corrupt_half: zero view axis");
  const Eigen::RowVector3d centroid = cloud.positions.colwise().mean();
  const Eigen::Vector3d axis = view_axis.normalized();
  std::vector<char> removed(static_cast<std::size_t>(cloud.size()), 0);
  for (Index i = 0; i < cloud.size(); ++i) {
    removed[static_cast<std::size_t>(i)] = (cloud.positions.row(i) - centroid).dot(axis) < 0.0;
  }
  return keep_unmasked(cloud, removed, "corrupt_half");
}

CorruptedCloud corrupt_hole(const PointCloud& cloud, Index n_centers, Index n_remove,
                            std::uint64_t seed) {
  std::vector<char> removed(static_cast<std::size_t>(cloud.size()), 0);
  if (n_centers > 0 && n_remove > 0) {
    require(n_centers <= cloud.size() && n_remove <= cloud.size(), ErrorCode::kSize,
            "corrupt_hole: more removals than points");
    Rng rng(seed);
    const Index start = uniform_index(rng, cloud.size());
    const IndexList centers = farthest_point_sampling(cloud.positions, n_centers, start);
    const NeighborIndex around = knn(take_rows(cloud.positions, centers), cloud.positions,
                                     n_remove, false);
    for (Index c = 0; c < around.size(); ++c) {
      for (Index j = 0; j < around.k(); ++j) removed[static_cast<std::size_t>(around.indices(c, j))] = 1;
    }
  }
  return keep_unmasked(cloud, removed, "corrupt_hole");
}

CorruptedCloud corrupt_cut(const PointCloud& cloud, const GeodesicMatrix& geo,
                           double extremity_fraction, std::uint64_t seed) {
  require(geo.size() == cloud.size(), ErrorCode::kShape, "corrupt_cut: geodesic size mismatch");
  require(extremity_fraction >= 0.0 && extremity_fraction < 1.0, ErrorCode::kSize,
          "corrupt_cut: fraction must be in [0, 1)");
  const Index n = cloud.size();
  const auto n_cut = static_cast<Index>(std::ceil(extremity_fraction * static_cast<double>(n)));
  std::vector<char> removed(static_cast<std::size_t>(n), 0);
  if (n_cut > 0) {
    const Mat d = geo.finite_for_loss();
    const Vec ecc = d.rowwise().maxCoeff();
    const double top = ecc.maxCoeff();
    // Extremities: points within 5% of the maximal eccentricity.
    IndexList candidates;
    for (Index i = 0; i < n; ++i) {
      if (ecc(i) >= 0.95 * top) candidates.push_back(i);
    }
    Rng rng(seed);
    const Index tip = candidates[static_cast<std::size_t>(
        uniform_index(rng, static_cast<Index>(candidates.size())))];
    IndexList order = iota_indices(n);
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return d(tip, a) < d(tip, b); });
    for (Index i = 0; i < n_cut; ++i) removed[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  }
  return keep_unmasked(cloud, removed, "corrupt_cut");
}

CorruptedCloud corrupt_cut(const PointCloud& cloud, double extremity_fraction, std::uint64_t seed) {
  if (extremity_fraction <= 0.0) return corrupt_cut(cloud, GeodesicMatrix{Mat::Zero(cloud.size(), cloud.size())}, 0.0, seed);
  return corrupt_cut(cloud, knn_graph_geodesics(cloud.positions), extremity_fraction, seed);
}

PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma_rel, std::uint64_t seed) {
  require(sigma_rel >= 0.0, ErrorCode::kConfig, "add_gaussian_noise: negative sigma");
  PointCloud out = cloud;
  if (sigma_rel == 0.0) return out;
  const double sigma = sigma_rel * bounding_box_diagonal(cloud.positions);
  Rng rng(seed);
  for (Index i = 0; i < out.positions.rows(); ++i) {
    for (Index j = 0; j < out.positions.cols(); ++j) out.positions(i, j) += sigma * standard_normal(rng);
  }
  return out;
}

}  // namespace nie::geom
