// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/dataset.hpp"

#include <spdlog/fmt/fmt.h>

#include <fstream>

#include "nie/common/error.hpp"
#include "nie/io/io.hpp"

namespace nie::cli {

void write_split(const fs::path& dir, const std::vector<geom::Shape>& shapes) {
  fs::create_directories(dir);
  std::ofstream list(dir / "shapes.txt");
  require(static_cast<bool>(list), ErrorCode::kIo, "cannot write " + (dir / "shapes.txt").string());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const std::string name = fmt::format("shape_{:03d}", i);
    io::write_off(dir / (name + ".off"), shapes[i].mesh);
    io::write_geodesics(dir / (name + ".gt.geod"), shapes[i].geo);
    list << name << "\n";
  }
}

std::vector<std::string> split_names(const fs::path& dir) {
  std::ifstream list(dir / "shapes.txt");
  require(static_cast<bool>(list), ErrorCode::kData, "missing shape list " + (dir / "shapes.txt").string());
  std::vector<std::string> names;
  for (std::string line; std::getline(list, line);) {
    if (!line.empty()) names.push_back(line);
  }
  require(!names.empty(), ErrorCode::kData, "empty shape list in " + dir.string());
  return names;
}

std::vector<StoredShape> read_split(const fs::path& dir, bool need_geodesics) {
  std::vector<StoredShape> out;
  for (const auto& name : split_names(dir)) {
    StoredShape s;
    s.name = name;
    s.mesh = io::read_off(dir / (name + ".off"));
    s.cloud.positions = s.mesh.vertices;
    s.cloud.source_id = name;
    s.cloud.validate();
    if (need_geodesics) {
      const fs::path g = dir / (name + ".geod");
      require(fs::exists(g), ErrorCode::kData, "missing geodesics " + g.string() + " (run `nie geodesics`)");
      s.geo = io::read_geodesics(g);
      require(s.geo.size() == s.cloud.size(), ErrorCode::kData, "geodesic size mismatch for " + name);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace nie::cli
