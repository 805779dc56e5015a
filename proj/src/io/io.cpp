// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/io/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "nie/common/error.hpp"
#include "nie/geom/geometry.hpp"

namespace nie::io {

namespace {

std::ifstream open_in(const fs::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out.precision(17);
  return out;
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Next non-empty, non-comment line.
bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  require(in.good(), ErrorCode::kIo, "truncated binary header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32_block(std::ostream& out, const Mat& m) {
  std::vector<char> buffer(static_cast<std::size_t>(m.size()) * 4);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j)));
      char* p = buffer.data() + (i * m.cols() + j) * 4;
      for (int b = 0; b < 4; ++b) p[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

Mat get_f32_block(std::istream& in, Index rows, Index cols) {
  std::vector<unsigned char> buffer(static_cast<std::size_t>(rows * cols) * 4);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  require(in.gcount() == static_cast<std::streamsize>(buffer.size()), ErrorCode::kIo,
          "truncated binary matrix");
  Mat m(rows, cols);
  for (Index i = 0; i < rows * cols; ++i) {
    const unsigned char* p = buffer.data() + i * 4;
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    m.data()[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return m;
}

void read_magic(std::istream& in, std::string_view magic, const fs::path& path) {
  char got[4] = {};
  in.read(got, 4);
  require(in.good() && std::string_view(got, 4) == magic, ErrorCode::kIo,
          "bad magic in " + path.string() + " (expected " + std::string(magic) + ")");
}

struct PlyData {
  Mat vertices;
  IndexMat triangles;
};

PlyData parse_ply(const fs::path& path, bool need_faces) {
  auto in = open_in(path);
  std::string line;
  require(std::getline(in, line) && line.rfind("ply", 0) == 0, ErrorCode::kIo,
          path.string() + ": not a PLY file");
  Index n_vertices = 0, n_faces = 0;
  std::vector<std::string> vertex_props;
  std::string current;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (key == "element") {
      ss >> current;
      Index count = 0;
      ss >> count;
      if (current == "vertex") n_vertices = count;
      if (current == "face") n_faces = count;
    } else if (key == "property" && current == "vertex") {
      std::string type, name;
      ss >> type >> name;
      vertex_props.push_back(name);
    } else if (key == "end_header") {
      break;
    }
  }
  require(ascii, ErrorCode::kIo, path.string() + ": only ASCII PLY is supported");
  const auto find_prop = [&](const char* name) {
    const auto it = std::find(vertex_props.begin(), vertex_props.end(), name);
    require(it != vertex_props.end(), ErrorCode::kIo, path.string() + ": missing vertex property");
    return static_cast<std::size_t>(it - vertex_props.begin());
  };
  const std::size_t ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
  PlyData data;
  data.vertices.resize(n_vertices, 3);
  std::vector<double> values(vertex_props.size());
  for (Index i = 0; i < n_vertices; ++i) {
    require(next_line(in, line), ErrorCode::kIo, path.string() + ": truncated vertex list");
    std::istringstream ss(line);
    for (auto& v : values) ss >> v;
    require(!ss.fail(), ErrorCode::kIo, path.string() + ": malformed vertex line");
    data.vertices.row(i) << values[ix], values[iy], values[iz];
  }
  std::vector<std::array<Index, 3>> tris;
  if (need_faces) {
    for (Index f = 0; f < n_faces; ++f) {
      require(next_line(in, line), ErrorCode::kIo, path.string() + ": truncated face list");
      std::istringstream ss(line);
      Index count = 0;
      ss >> count;
      std::vector<Index> poly(static_cast<std::size_t>(count));
      for (auto& v : poly) ss >> v;
      require(!ss.fail() && count >= 3, ErrorCode::kIo, path.string() + ": malformed face line");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) tris.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  data.triangles.resize(static_cast<Index>(tris.size()), 3);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    data.triangles.row(static_cast<Index>(t)) << tris[t][0], tris[t][1], tris[t][2];
  }
  return data;
}

}  // namespace

geom::TriangleMesh read_off(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  require(next_line(in, line), ErrorCode::kIo, path.string() + ": empty file");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  require(magic.rfind("OFF", 0) == 0, ErrorCode::kIo, path.string() + ": not an OFF file");
  Index nv = 0, nf = 0, ne = 0;
  if (!(header >> nv >> nf >> ne)) {
    require(next_line(in, line), ErrorCode::kIo, path.string() + ": missing counts");
    std::istringstream counts(line);
    counts >> nv >> nf >> ne;
    require(!counts.fail(), ErrorCode::kIo, path.string() + ": malformed counts");
  }
  Mat vertices(nv, 3);
  for (Index i = 0; i < nv; ++i) {
    require(next_line(in, line), ErrorCode::kIo, path.string() + ": truncated vertex list");
    std::istringstream ss(line);
    ss >> vertices(i, 0) >> vertices(i, 1) >> vertices(i, 2);
    require(!ss.fail(), ErrorCode::kIo, path.string() + ": malformed vertex line");
  }
  std::vector<std::array<Index, 3>> tris;
  for (Index f = 0; f < nf; ++f) {
    require(next_line(in, line), ErrorCode::kIo, path.string() + ": truncated face list");
    std::istringstream ss(line);
    Index count = 0;
    ss >> count;
    std::vector<Index> poly(static_cast<std::size_t>(std::max<Index>(count, 0)));
    for (auto& v : poly) ss >> v;
    require(!ss.fail() && count >= 3, ErrorCode::kIo, path.string() + ": malformed face line");
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) tris.push_back({poly[0], poly[k], poly[k + 1]});
  }
  IndexMat faces(static_cast<Index>(tris.size()), 3);
  for (std::size_t t = 0; t < tris.size(); ++t) faces.row(static_cast<Index>(t)) << tris[t][0], tris[t][1], tris[t][2];
  return geom::TriangleMesh::create(std::move(vertices), std::move(faces));
}

void write_off(const fs::path& path, const geom::TriangleMesh& mesh) {
  auto out = open_out(path);
  out << "OFF\n" << mesh.vertices.rows() << ' ' << mesh.triangles.rows() << " 0\n";
  for (Index i = 0; i < mesh.vertices.rows(); ++i) {
    out << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
  }
  for (Index t = 0; t < mesh.triangles.rows(); ++t) {
    out << "3 " << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1) << ' ' << mesh.triangles(t, 2) << '\n';
  }
}

geom::TriangleMesh read_ply_mesh(const fs::path& path) {
  PlyData data = parse_ply(path, true);
  return geom::TriangleMesh::create(std::move(data.vertices), std::move(data.triangles));
}

void write_ply_mesh(const fs::path& path, const geom::TriangleMesh& mesh) {
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.rows()
      << "\nproperty double x\nproperty double y\nproperty double z\nelement face "
      << mesh.triangles.rows() << "\nproperty list uchar int vertex_indices\nend_header\n";
  for (Index i = 0; i < mesh.vertices.rows(); ++i) {
    out << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
  }
  for (Index t = 0; t < mesh.triangles.rows(); ++t) {
    out << "3 " << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1) << ' ' << mesh.triangles(t, 2) << '\n';
  }
}

geom::TriangleMesh read_mesh(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".off") return read_off(path);
  if (ext == ".ply") return read_ply_mesh(path);
  fail(ErrorCode::kIo, "unsupported mesh format: " + path.string());
}

geom::PointCloud read_xyz(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::vector<Eigen::RowVector3d> rows;
  while (next_line(in, line)) {
    std::istringstream ss(line);
    Eigen::RowVector3d p;
    ss >> p(0) >> p(1) >> p(2);
    require(!ss.fail(), ErrorCode::kIo, path.string() + ": malformed XYZ line");
    rows.push_back(p);
  }
  geom::PointCloud cloud;
  cloud.positions.resize(static_cast<Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) cloud.positions.row(static_cast<Index>(i)) = rows[i];
  cloud.source_id = path.stem().string();
  return cloud;
}

void write_xyz(const fs::path& path, const geom::PointCloud& cloud) {
  auto out = open_out(path);
  for (Index i = 0; i < cloud.size(); ++i) {
    out << cloud.positions(i, 0) << ' ' << cloud.positions(i, 1) << ' ' << cloud.positions(i, 2) << '\n';
  }
}

geom::PointCloud read_ply_cloud(const fs::path& path) {
  geom::PointCloud cloud;
  cloud.positions = parse_ply(path, false).vertices;
  cloud.source_id = path.stem().string();
  return cloud;
}

void write_ply_cloud(const fs::path& path, const geom::PointCloud& cloud,
                     const std::vector<Rgb>* colors) {
  require(colors == nullptr || static_cast<Index>(colors->size()) == cloud.size(), ErrorCode::kShape,
          "write_ply_cloud: one color per point required");
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n";
  if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (Index i = 0; i < cloud.size(); ++i) {
    out << cloud.positions(i, 0) << ' ' << cloud.positions(i, 1) << ' ' << cloud.positions(i, 2);
    if (colors) {
      const Rgb& c = (*colors)[static_cast<std::size_t>(i)];
      out << ' ' << int{c[0]} << ' ' << int{c[1]} << ' ' << int{c[2]};
    }
    out << '\n';
  }
}

geom::PointCloud read_cloud(const fs::path& path) {
  const std::string ext = lower_extension(path);
  geom::PointCloud cloud;
  if (ext == ".xyz" || ext == ".txt") {
    cloud = read_xyz(path);
  } else if (ext == ".ply") {
    cloud = read_ply_cloud(path);
  } else if (ext == ".off") {
    cloud.positions = read_off(path).vertices;
    cloud.source_id = path.stem().string();
  } else {
    fail(ErrorCode::kIo, "unsupported point cloud format: " + path.string());
  }
  geom::deduplicate(cloud);
  cloud.validate();
  return cloud;
}

void write_geodesics(const fs::path& path, const geom::GeodesicMatrix& geo) {
  auto out = open_out(path, true);
  out.write("GEOD", 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(geo.size()));
  put_f32_block(out, geo.dist);
}

geom::GeodesicMatrix read_geodesics(const fs::path& path) {
  auto in = open_in(path, true);
  read_magic(in, "GEOD", path);
  require(get_u32(in) == 1, ErrorCode::kIo, path.string() + ": unsupported GEOD version");
  const auto n = static_cast<Index>(get_u32(in));
  return geom::GeodesicMatrix{get_f32_block(in, n, n)};
}

void write_matrix_f32(const fs::path& path, std::string_view magic, const Mat& m) {
  require(magic.size() == 4, ErrorCode::kIo, "matrix magic must be 4 bytes");
  auto out = open_out(path, true);
  out.write(magic.data(), 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  put_f32_block(out, m);
}

Mat read_matrix_f32(const fs::path& path, std::string_view magic) {
  auto in = open_in(path, true);
  read_magic(in, magic, path);
  require(get_u32(in) == 1, ErrorCode::kIo, path.string() + ": unsupported version");
  const auto rows = static_cast<Index>(get_u32(in));
  const auto cols = static_cast<Index>(get_u32(in));
  return get_f32_block(in, rows, cols);
}

void write_indices(const fs::path& path, const IndexList& indices) {
  auto out = open_out(path);
  for (Index i : indices) out << i << '\n';
}

IndexList read_indices(const fs::path& path) {
  auto in = open_in(path);
  IndexList out;
  std::string line;
  while (next_line(in, line)) out.push_back(std::stoll(line));
  return out;
}

}  // namespace nie::io
