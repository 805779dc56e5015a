// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "nie/geom/types.hpp"

namespace nie::geom {

/// Scales mesh and cloud by 1/sqrt(mesh area) so the mesh has unit area.
std::pair<TriangleMesh, PointCloud> normalize_unit_area(const TriangleMesh& mesh,
                                                        const PointCloud& cloud);

/// Mesh-free normalization for inference: scales the cloud so its bounding-box
/// diagonal equals `target_diagonal`, typically the median diagonal of the
/// unit-area-normalized training shapes (see median_normalized_diagonal).
PointCloud normalize_to_diagonal(const PointCloud& cloud, double target_diagonal);

double median_normalized_diagonal(const std::vector<PointCloud>& unit_area_clouds);

double bounding_box_diagonal(const Mat& positions);

/// Removes points closer than `tolerance` to an earlier point. Returns the
/// kept original indices.
IndexList deduplicate(PointCloud& cloud, double tolerance = 1e-9);

/// Greedy farthest point sampling; ties go to the lowest index.
IndexList farthest_point_sampling(const Mat& positions, Index m, Index seed_index);

/// K nearest reference rows per query row, ascending by distance then index.
NeighborIndex knn(const Mat& query, const Mat& reference, Index k, bool exclude_self);

/// Nearest reference row for each query row.
IndexList nearest_neighbor(const Mat& query, const Mat& reference);

struct ConnectivityReport {
  Index components = 0;
  IndexList isolated_vertices;
};

ConnectivityReport connectivity(const TriangleMesh& mesh);

/// All-pairs shortest paths over the undirected mesh edge graph with
/// Euclidean edge weights.
GeodesicMatrix geodesics_dijkstra(const TriangleMesh& mesh, Index vertex_cap = 5000);

/// Same, for an explicit undirected edge list.
GeodesicMatrix graph_geodesics(const Mat& vertices,
                               const std::vector<std::pair<Index, Index>>& edges);

/// Geodesics on a point cloud approximated by Dijkstra over its symmetric
/// k-NN graph.
GeodesicMatrix knn_graph_geodesics(const Mat& positions, Index k = 8);

}  // namespace nie::geom
