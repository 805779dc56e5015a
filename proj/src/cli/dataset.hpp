// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nie/geom/types.hpp"

namespace nie::cli {

namespace fs = std::filesystem;

// A split directory holds shapes.txt (one name per line), <name>.off,
// optionally <name>.gt.geod (generator ground truth) and <name>.geod.

struct StoredShape {
  std::string name;
  geom::TriangleMesh mesh;
  geom::PointCloud cloud;  // mesh vertices, no deduplication
  geom::GeodesicMatrix geo;
};

void write_split(const fs::path& dir, const std::vector<geom::Shape>& shapes);
std::vector<std::string> split_names(const fs::path& dir);

/// Loads meshes and `<name>.geod`; with `need_geodesics` false the matrices
/// are left empty.
std::vector<StoredShape> read_split(const fs::path& dir, bool need_geodesics);

}  // namespace nie::cli
