// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "nie/geom/types.hpp"

namespace nie::geom {

struct StripParams {
  Index nu = 30;          // samples along the bent direction
  Index nv = 10;          // samples across
  double aspect = 3.0;    // length / width; the flat strip has unit area
};

/// A unit-area strip of the given parameters bent along a circular arc that
/// subtends `bend` radians. Geodesics are the planar distances of the unrolled
/// parameterization.
Shape make_strip(double bend, const StripParams& params = {});

/// Analytic geodesics of the flat strip (shared by every bend).
GeodesicMatrix strip_geodesics(const StripParams& params);

/// `count` strips with bends drawn uniformly from [bend_min, bend_max].
std::vector<Shape> make_strip_family(Index count, double bend_min, double bend_max,
                                     const StripParams& params, std::uint64_t seed);

struct ArmParams {
  Index links = 3;
  double link_length = 1.0;
  double radius = 0.07;
  double bend_radius = 0.25;
  Index ring_vertices = 8;
  Index cap_rings = 2;
};

/// Capsule chain with one planar joint between consecutive links. Each joint
/// bends the axis along a circular arc of radius bend_radius. Throws
/// ErrorCode::kPose if the tube would intersect itself.
Shape make_arm(const std::vector<double>& joint_angles, const ArmParams& params = {});

/// `count` arms with every joint angle drawn uniformly from
/// [angle_min, angle_max]; self-intersecting draws are redrawn.
std::vector<Shape> make_articulated_family(Index count, double angle_min, double angle_max,
                                           const ArmParams& params, std::uint64_t seed);

/// Subdivided icosahedron on the unit sphere (subdivision 3 gives 642 vertices).
TriangleMesh make_icosphere(int subdivisions);

}  // namespace nie::geom
