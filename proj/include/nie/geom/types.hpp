// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "nie/common/linalg.hpp"

namespace nie::geom {

/// Sampled surface points. `scale_factor` records the unit-area scaling that
/// was applied to the raw coordinates (1 when none was applied).
struct PointCloud {
  Mat positions;  // n x 3
  double scale_factor = 1.0;
  std::string source_id;

  Index size() const { return positions.rows(); }

  /// Throws unless n >= 4, three columns and all coordinates finite.
  void validate() const;
};

struct TriangleMesh {
  Mat vertices;        // n x 3
  IndexMat triangles;  // t x 3
  double total_area = 0.0;

  Index vertex_count() const { return vertices.rows(); }

  /// Builds a mesh, checking index ranges and triangle degeneracy, and
  /// computing total_area.
  static TriangleMesh create(Mat vertices, IndexMat triangles);
};

double triangle_area(const Mat& vertices, Index a, Index b, Index c);

/// Dense symmetric pairwise geodesic distances; +inf marks unreachable pairs.
struct GeodesicMatrix {
  Mat dist;

  Index size() const { return dist.rows(); }
  bool all_finite() const;

  /// Copy with +inf entries replaced by 1.5x the largest finite entry; used
  /// only where losses need finite targets.
  Mat finite_for_loss() const;

  /// Restriction to the given point subset.
  GeodesicMatrix restrict_to(const IndexList& rows) const;
};

/// Row p lists K neighbor indices of point p.
struct NeighborIndex {
  IndexMat indices;

  Index size() const { return indices.rows(); }
  Index k() const { return indices.cols(); }
};

/// One sample of a synthetic family: mesh, the cloud on its vertices and the
/// ground-truth geodesics.
struct Shape {
  TriangleMesh mesh;
  PointCloud cloud;
  GeodesicMatrix geo;
};

}  // namespace nie::geom
