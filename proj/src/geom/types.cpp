// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/geom/types.hpp"

#include <cmath>
#include <limits>

#include "nie/common/error.hpp"

namespace nie::geom {

void PointCloud::validate() const {
  require(positions.cols() == 3, ErrorCode::kShape, "point cloud must have 3 columns");
  require(positions.rows() >= 4, ErrorCode::kSize, "point cloud needs at least 4 points");
  require(positions.allFinite(), ErrorCode::kData, "point cloud has non-finite coordinates");
}

double triangle_area(const Mat& vertices, Index a, Index b, Index c) {
  const Eigen::Vector3d pa = vertices.row(a).transpose();
  const Eigen::Vector3d pb = vertices.row(b).transpose();
  const Eigen::Vector3d pc = vertices.row(c).transpose();
  return 0.5 * (pb - pa).cross(pc - pa).norm();
}

TriangleMesh TriangleMesh::create(Mat vertices, IndexMat triangles) {
  require(vertices.cols() == 3, ErrorCode::kShape, "mesh vertices must have 3 columns");
  require(triangles.cols() == 3, ErrorCode::kShape, "mesh triangles must have 3 columns");
  require(vertices.allFinite(), ErrorCode::kData, "mesh has non-finite vertices");
  TriangleMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  const Index n = mesh.vertices.rows();
  for (Index t = 0; t < mesh.triangles.rows(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const Index v = mesh.triangles(t, e);
      require(v >= 0 && v < n, ErrorCode::kData, "mesh triangle index out of range");
    }
    const double area = triangle_area(mesh.vertices, mesh.triangles(t, 0), mesh.triangles(t, 1),
                                      mesh.triangles(t, 2));
    require(area > 1e-12, ErrorCode::kDegenerateInput, "mesh has a degenerate triangle");
    mesh.total_area += area;
  }
  return mesh;
}

bool GeodesicMatrix::all_finite() const { return dist.allFinite(); }

Mat GeodesicMatrix::finite_for_loss() const {
  double max_finite = 0.0;
  bool any_inf = false;
  for (Index i = 0; i < dist.size(); ++i) {
    const double d = dist.data()[i];
    if (std::isfinite(d)) {
      max_finite = std::max(max_finite, d);
    } else {
      any_inf = true;
    }
  }
  if (!any_inf) return dist;
  Mat out = dist;
  const double fill = 1.5 * max_finite;
  for (Index i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out.data()[i])) out.data()[i] = fill;
  }
  return out;
}

GeodesicMatrix GeodesicMatrix::restrict_to(const IndexList& rows) const {
  return GeodesicMatrix{take_block(dist, rows)};
}

}  // namespace nie::geom
