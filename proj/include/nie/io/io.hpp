// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "nie/geom/types.hpp"

namespace nie::io {

namespace fs = std::filesystem;

// Meshes: ASCII OFF and PLY.
geom::TriangleMesh read_off(const fs::path& path);
void write_off(const fs::path& path, const geom::TriangleMesh& mesh);
geom::TriangleMesh read_ply_mesh(const fs::path& path);
void write_ply_mesh(const fs::path& path, const geom::TriangleMesh& mesh);
geom::TriangleMesh read_mesh(const fs::path& path);  // by extension

// Point clouds: XYZ (one point per line) and ASCII PLY.
geom::PointCloud read_xyz(const fs::path& path);
void write_xyz(const fs::path& path, const geom::PointCloud& cloud);
geom::PointCloud read_ply_cloud(const fs::path& path);

using Rgb = std::array<std::uint8_t, 3>;
void write_ply_cloud(const fs::path& path, const geom::PointCloud& cloud,
                     const std::vector<Rgb>* colors = nullptr);

/// Reads .xyz, .ply or .off (vertices only) and applies the 1e-9
/// deduplication pass.
geom::PointCloud read_cloud(const fs::path& path);

// GeodesicMatrix: "GEOD", u32 version = 1, u32 n, n*n little-endian f32.
void write_geodesics(const fs::path& path, const geom::GeodesicMatrix& geo);
geom::GeodesicMatrix read_geodesics(const fs::path& path);

// Generic f32 matrices with the same framing plus a column count:
// magic, u32 version = 1, u32 rows, u32 cols, rows*cols little-endian f32.
void write_matrix_f32(const fs::path& path, std::string_view magic, const Mat& m);
Mat read_matrix_f32(const fs::path& path, std::string_view magic);

// ASCII integer lists, one value per line.
void write_indices(const fs::path& path, const IndexList& indices);
IndexList read_indices(const fs::path& path);

}  // namespace nie::io
