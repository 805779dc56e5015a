// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/geom/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "nie/common/error.hpp"
#include "nie/common/random.hpp"
#include "nie/geom/geometry.hpp"

namespace nie::geom {

namespace {

constexpr double kPi = std::numbers::pi;

Mat strip_parameters(const StripParams& params) {
  const double length = std::sqrt(params.aspect);
  const double width = 1.0 / length;
  Mat uv(params.nu * params.nv, 2);
  for (Index i = 0; i < params.nu; ++i) {
    for (Index j = 0; j < params.nv; ++j) {
      const Index idx = i * params.nv + j;
      uv(idx, 0) = -0.5 * length + length * static_cast<double>(i) / static_cast<double>(params.nu - 1);
      uv(idx, 1) = -0.5 * width + width * static_cast<double>(j) / static_cast<double>(params.nv - 1);
    }
  }
  return uv;
}

// Quads split along alternating diagonals so edge-graph paths are not biased
// towards one diagonal direction.
IndexMat grid_triangles(Index nu, Index nv) {
  IndexMat tris((nu - 1) * (nv - 1) * 2, 3);
  Index t = 0;
  for (Index i = 0; i + 1 < nu; ++i) {
    for (Index j = 0; j + 1 < nv; ++j) {
      const Index a = i * nv + j, b = (i + 1) * nv + j, c = (i + 1) * nv + j + 1, d = i * nv + j + 1;
      if ((i + j) % 2 == 0) {
        tris.row(t++) << a, b, c;
        tris.row(t++) << a, c, d;
      } else {
        tris.row(t++) << a, b, d;
        tris.row(t++) << b, c, d;
      }
    }
  }
  return tris;
}

void center_rows(Mat& positions) {
  const Eigen::RowVector3d centroid = positions.colwise().mean();
  positions.rowwise() -= centroid;
}

struct AxisSample {
  Eigen::Vector2d point;
  double heading;
};

// Planar axis of the arm sampled at `samples` equally spaced arc lengths.
std::vector<AxisSample> arm_axis(const std::vector<double>& angles, const ArmParams& p,
                                 Index samples) {
  const double total = static_cast<double>(p.links) * p.link_length;
  auto curvature = [&](double s) {
    double k = 0.0;
    for (std::size_t j = 0; j < angles.size(); ++j) {
      const double centre = static_cast<double>(j + 1) * p.link_length;
      const double half = 0.5 * p.bend_radius * std::abs(angles[j]);
      if (half > 0.0 && std::abs(s - centre) <= half) {
        k += (angles[j] > 0 ? 1.0 : -1.0) / p.bend_radius;
      }
    }
    return k;
  };
  constexpr int kSub = 32;
  std::vector<AxisSample> out;
  out.reserve(static_cast<std::size_t>(samples));
  Eigen::Vector2d pos(0.0, 0.0);
  double heading = 0.0;
  out.push_back({pos, heading});
  const double ds = total / static_cast<double>(samples - 1) / kSub;
  for (Index i = 1; i < samples; ++i) {
    for (int k = 0; k < kSub; ++k) {
      const double s0 = (static_cast<double>(i - 1) * kSub + k) * ds;
      const double next = heading + curvature(s0 + 0.5 * ds) * ds;
      const double mid = 0.5 * (heading + next);
      pos += ds * Eigen::Vector2d(std::cos(mid), std::sin(mid));
      heading = next;
    }
    out.push_back({pos, heading});
  }
  return out;
}

}  // namespace

GeodesicMatrix strip_geodesics(const StripParams& params) {
  const Mat uv = strip_parameters(params);
  return GeodesicMatrix{pairwise_distances(uv, uv)};
}

Shape make_strip(double bend, const StripParams& params) {
  require(params.nu >= 2 && params.nv >= 2 && params.nu * params.nv >= 4, ErrorCode::kSize,
          "make_strip: degenerate resolution");
  require(params.aspect > 0.0, ErrorCode::kSize, "make_strip: aspect must be positive");
  require(std::abs(bend) < 2.0 * kPi, ErrorCode::kPose, "make_strip: bend would self-intersect");
  const Mat uv = strip_parameters(params);
  const double length = std::sqrt(params.aspect);
  Mat xyz(uv.rows(), 3);
  for (Index i = 0; i < uv.rows(); ++i) {
    const double u = uv(i, 0), v = uv(i, 1);
    if (std::abs(bend) < 1e-12) {
      xyz.row(i) << u, 0.0, v;
    } else {
      const double radius = length / bend;
      xyz.row(i) << radius * std::sin(u / radius), radius * (1.0 - std::cos(u / radius)), v;
    }
  }
  center_rows(xyz);
  Shape shape;
  shape.mesh = TriangleMesh::create(xyz, grid_triangles(params.nu, params.nv));
  shape.cloud.positions = xyz;
  shape.cloud.source_id = "strip";
  shape.geo = GeodesicMatrix{pairwise_distances(uv, uv)};
  return shape;
}

std::vector<Shape> make_strip_family(Index count, double bend_min, double bend_max,
                                     const StripParams& params, std::uint64_t seed) {
  require(count >= 0, ErrorCode::kSize, "make_strip_family: negative count");
  Rng rng(seed);
  std::vector<Shape> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    const double bend = uniform_real(rng, bend_min, bend_max);
    out.push_back(make_strip(bend, params));
    out.back().cloud.source_id = "strip_" + std::to_string(i);
  }
  return out;
}

Shape make_arm(const std::vector<double>& joint_angles, const ArmParams& p) {
  require(p.links >= 1 && p.ring_vertices >= 3 && p.cap_rings >= 0, ErrorCode::kSize,
          "make_arm: degenerate resolution");
  require(static_cast<Index>(joint_angles.size()) == p.links - 1, ErrorCode::kSize,
          "make_arm: need one angle per joint");
  for (double a : joint_angles) {
    require(std::abs(a) <= kPi && p.bend_radius * std::abs(a) < p.link_length, ErrorCode::kPose,
            "make_arm: joint angle out of range");
  }
  const double r = p.radius;
  const Index m = p.ring_vertices;
  const double total = static_cast<double>(p.links) * p.link_length;
  const double spacing = 2.0 * kPi * r / static_cast<double>(m);
  const Index samples = static_cast<Index>(std::lround(total / spacing)) + 1;
  const std::vector<AxisSample> axis = arm_axis(joint_angles, p, samples);

  // Tube self-intersection: axis points far apart along the arc must stay more
  // than one diameter apart in space.
  const double arc_step = total / static_cast<double>(samples - 1);
  for (Index i = 0; i < samples; ++i) {
    for (Index j = i + 1; j < samples; ++j) {
      if (static_cast<double>(j - i) * arc_step < kPi * r + 2.0 * r) continue;
      const double d = (axis[static_cast<std::size_t>(i)].point - axis[static_cast<std::size_t>(j)].point).norm();
      if (d < 2.05 * r) fail(ErrorCode::kPose, "make_arm: pose self-intersects");
    }
  }

  std::vector<Eigen::Vector3d> verts;
  std::vector<std::vector<Index>> rings;
  auto add_ring = [&](const Eigen::Vector3d& centre, const Eigen::Vector3d& normal,
                      const Eigen::Vector3d& binormal, double radius) {
    std::vector<Index> ring;
    for (Index k = 0; k < m; ++k) {
      const double phi = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m);
      ring.push_back(static_cast<Index>(verts.size()));
      verts.push_back(centre + radius * (std::cos(phi) * normal + std::sin(phi) * binormal));
    }
    rings.push_back(std::move(ring));
  };
  auto frame = [&](const AxisSample& a) {
    const Eigen::Vector3d c(a.point.x(), a.point.y(), 0.0);
    const Eigen::Vector3d t(std::cos(a.heading), std::sin(a.heading), 0.0);
    const Eigen::Vector3d n(-std::sin(a.heading), std::cos(a.heading), 0.0);
    return std::tuple{c, t, n};
  };
  const Eigen::Vector3d binormal(0.0, 0.0, 1.0);
  const double cap_step = 0.5 * kPi / static_cast<double>(p.cap_rings + 1);

  const auto [c0, t0, n0] = frame(axis.front());
  const Index start_pole = static_cast<Index>(verts.size());
  verts.push_back(c0 - r * t0);
  for (Index c = p.cap_rings; c >= 1; --c) {
    const double psi = cap_step * static_cast<double>(c);
    add_ring(c0 - r * std::sin(psi) * t0, n0, binormal, r * std::cos(psi));
  }
  for (const auto& a : axis) {
    const auto [c, t, n] = frame(a);
    add_ring(c, n, binormal, r);
  }
  const auto [c1, t1, n1] = frame(axis.back());
  for (Index c = 1; c <= p.cap_rings; ++c) {
    const double psi = cap_step * static_cast<double>(c);
    add_ring(c1 + r * std::sin(psi) * t1, n1, binormal, r * std::cos(psi));
  }
  const Index end_pole = static_cast<Index>(verts.size());
  verts.push_back(c1 + r * t1);

  std::vector<std::array<Index, 3>> tris;
  for (Index k = 0; k < m; ++k) {
    tris.push_back({start_pole, rings.front()[static_cast<std::size_t>((k + 1) % m)],
                    rings.front()[static_cast<std::size_t>(k)]});
  }
  for (std::size_t i = 0; i + 1 < rings.size(); ++i) {
    for (Index k = 0; k < m; ++k) {
      const auto kk = static_cast<std::size_t>(k), k1 = static_cast<std::size_t>((k + 1) % m);
      const Index a = rings[i][kk], b = rings[i][k1], c = rings[i + 1][k1], d = rings[i + 1][kk];
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }
  for (Index k = 0; k < m; ++k) {
    tris.push_back({end_pole, rings.back()[static_cast<std::size_t>(k)],
                    rings.back()[static_cast<std::size_t>((k + 1) % m)]});
  }

  Mat xyz(static_cast<Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) xyz.row(static_cast<Index>(i)) = verts[i].transpose();
  center_rows(xyz);
  IndexMat faces(static_cast<Index>(tris.size()), 3);
  for (std::size_t i = 0; i < tris.size(); ++i) {
    faces.row(static_cast<Index>(i)) << tris[i][0], tris[i][1], tris[i][2];
  }
  TriangleMesh raw = TriangleMesh::create(std::move(xyz), std::move(faces));
  PointCloud cloud;
  cloud.positions = raw.vertices;
  cloud.source_id = "arm";
  auto [mesh, normalized] = normalize_unit_area(raw, cloud);
  Shape shape;
  shape.geo = geodesics_dijkstra(mesh);
  shape.mesh = std::move(mesh);
  shape.cloud = std::move(normalized);
  return shape;
}

std::vector<Shape> make_articulated_family(Index count, double angle_min, double angle_max,
                                           const ArmParams& params, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Shape> out;
  for (Index i = 0; i < count; ++i) {
    for (int attempt = 0;; ++attempt) {
      std::vector<double> angles(static_cast<std::size_t>(params.links - 1));
      for (auto& a : angles) a = uniform_real(rng, angle_min, angle_max);
      try {
        out.push_back(make_arm(angles, params));
        out.back().cloud.source_id = "arm_" + std::to_string(i);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kPose || attempt >= 100) throw;
      }
    }
  }
  return out;
}

TriangleMesh make_icosphere(int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                                    {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                                    {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<Index, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<Index, Index>, Index> cache;
    auto midpoint = [&](Index a, Index b) {
      const auto key = std::minmax(a, b);
      auto it = cache.find({key.first, key.second});
      if (it != cache.end()) return it->second;
      v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
      const auto id = static_cast<Index>(v.size() - 1);
      cache.emplace(std::pair{key.first, key.second}, id);
      return id;
    };
    std::vector<std::array<Index, 3>> next;
    for (const auto& tri : f) {
      const Index ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]),
                  ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  Mat xyz(static_cast<Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i) xyz.row(static_cast<Index>(i)) = v[i].transpose();
  IndexMat faces(static_cast<Index>(f.size()), 3);
  for (std::size_t i = 0; i < f.size(); ++i) faces.row(static_cast<Index>(i)) << f[i][0], f[i][1], f[i][2];
  return TriangleMesh::create(std::move(xyz), std::move(faces));
}

}  // namespace nie::geom
