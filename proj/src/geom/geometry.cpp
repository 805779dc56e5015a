// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/geom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

#include "nie/common/error.hpp"
#include "nie/common/parallel.hpp"

namespace nie::geom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Adjacency = std::vector<std::vector<std::pair<Index, double>>>;

Adjacency build_adjacency(const Mat& vertices, const std::vector<std::pair<Index, Index>>& edges) {
  const Index n = vertices.rows();
  Adjacency adj(static_cast<std::size_t>(n));
  std::set<std::pair<Index, Index>> seen;
  for (auto [a, b] : edges) {
    require(a >= 0 && a < n && b >= 0 && b < n, ErrorCode::kSize, "edge index out of range");
    if (a == b) continue;
    const auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second) continue;
    const double w = (vertices.row(a) - vertices.row(b)).norm();
    adj[static_cast<std::size_t>(a)].emplace_back(b, w);
    adj[static_cast<std::size_t>(b)].emplace_back(a, w);
  }
  // Deterministic relaxation order.
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

void dijkstra_row(const Adjacency& adj, Index source, double* out) {
  const auto n = static_cast<Index>(adj.size());
  std::fill(out, out + n, kInf);
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  out[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > out[u]) continue;
    for (auto [v, w] : adj[static_cast<std::size_t>(u)]) {
      const double nd = d + w;
      if (nd < out[v]) {
        out[v] = nd;
        queue.emplace(nd, v);
      }
    }
  }
}

std::vector<std::pair<Index, Index>> mesh_edges(const TriangleMesh& mesh) {
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(static_cast<std::size_t>(mesh.triangles.rows() * 3));
  for (Index t = 0; t < mesh.triangles.rows(); ++t) {
    for (int e = 0; e < 3; ++e) {
      edges.emplace_back(mesh.triangles(t, e), mesh.triangles(t, (e + 1) % 3));
    }
  }
  return edges;
}

}  // namespace

std::pair<TriangleMesh, PointCloud> normalize_unit_area(const TriangleMesh& mesh,
                                                        const PointCloud& cloud) {
  require(mesh.total_area > 1e-12 && std::isfinite(mesh.total_area), ErrorCode::kDegenerateInput,
          "normalize_unit_area: zero-area mesh");
  const double s = 1.0 / std::sqrt(mesh.total_area);
  TriangleMesh out_mesh = mesh;
  out_mesh.vertices *= s;
  out_mesh.total_area = 0.0;
  for (Index t = 0; t < out_mesh.triangles.rows(); ++t) {
    out_mesh.total_area += triangle_area(out_mesh.vertices, out_mesh.triangles(t, 0),
                                         out_mesh.triangles(t, 1), out_mesh.triangles(t, 2));
  }
  PointCloud out_cloud = cloud;
  out_cloud.positions *= s;
  out_cloud.scale_factor = cloud.scale_factor * s;
  return {std::move(out_mesh), std::move(out_cloud)};
}

double bounding_box_diagonal(const Mat& positions) {
  if (positions.rows() == 0) return 0.0;
  return (positions.colwise().maxCoeff() - positions.colwise().minCoeff()).norm();
}

PointCloud normalize_to_diagonal(const PointCloud& cloud, double target_diagonal) {
  const double diag = bounding_box_diagonal(cloud.positions);
  require(diag > 0.0 && target_diagonal > 0.0, ErrorCode::kDegenerateInput,
          "normalize_to_diagonal: zero extent");
  PointCloud out = cloud;
  const double s = target_diagonal / diag;
  out.positions *= s;
  out.scale_factor = cloud.scale_factor * s;
  return out;
}

double median_normalized_diagonal(const std::vector<PointCloud>& unit_area_clouds) {
  require(!unit_area_clouds.empty(), ErrorCode::kData, "median_normalized_diagonal: no clouds");
  std::vector<double> diags;
  for (const auto& c : unit_area_clouds) diags.push_back(bounding_box_diagonal(c.positions));
  std::sort(diags.begin(), diags.end());
  const std::size_t mid = diags.size() / 2;
  return diags.size() % 2 ? diags[mid] : 0.5 * (diags[mid - 1] + diags[mid]);
}

IndexList deduplicate(PointCloud& cloud, double tolerance) {
  const Index n = cloud.size();
  IndexList order = iota_indices(n);
  const Mat& p = cloud.positions;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return p(a, 0) < p(b, 0) || (p(a, 0) == p(b, 0) && a < b);
  });
  std::vector<char> drop(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Index a = order[i];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Index b = order[j];
      if (p(b, 0) - p(a, 0) > tolerance) break;
      if ((p.row(a) - p.row(b)).cwiseAbs().maxCoeff() <= tolerance) {
        // keep the lower original index
        drop[static_cast<std::size_t>(std::max(a, b))] = 1;
      }
    }
  }
  IndexList kept;
  for (Index i = 0; i < n; ++i) {
    if (!drop[static_cast<std::size_t>(i)]) kept.push_back(i);
  }
  cloud.positions = take_rows(p, kept);
  return kept;
}

IndexList farthest_point_sampling(const Mat& positions, Index m, Index seed_index) {
  const Index n = positions.rows();
  require(m >= 1 && m <= n, ErrorCode::kSize, "farthest_point_sampling: need 1 <= m <= n");
  require(seed_index >= 0 && seed_index < n, ErrorCode::kSize,
          "farthest_point_sampling: seed index out of range");
  IndexList picked;
  picked.reserve(static_cast<std::size_t>(m));
  Vec min_dist = Vec::Constant(n, kInf);
  Index current = seed_index;
  for (Index s = 0; s < m; ++s) {
    picked.push_back(current);
    min_dist(current) = -1.0;  // selected
    Index best = -1;
    double best_d = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (min_dist(i) < 0.0) continue;
      const double d = (positions.row(i) - positions.row(current)).squaredNorm();
      if (d < min_dist(i)) min_dist(i) = d;
      if (min_dist(i) > best_d) {
        best_d = min_dist(i);
        best = i;
      }
    }
    current = best;
  }
  return picked;
}

NeighborIndex knn(const Mat& query, const Mat& reference, Index k, bool exclude_self) {
  const Index available = reference.rows() - (exclude_self ? 1 : 0);
  require(k >= 1 && k <= available, ErrorCode::kSize, "knn: K too large for reference set");
  require(query.cols() == reference.cols(), ErrorCode::kShape, "knn: dimension mismatch");
  require(!exclude_self || query.rows() == reference.rows(), ErrorCode::kShape,
          "knn: exclude_self needs query == reference");
  NeighborIndex out;
  out.indices.resize(query.rows(), k);
  std::vector<std::pair<double, Index>> cand(static_cast<std::size_t>(reference.rows()));
  for (Index q = 0; q < query.rows(); ++q) {
    std::size_t count = 0;
    for (Index r = 0; r < reference.rows(); ++r) {
      if (exclude_self && r == q) continue;
      cand[count++] = {(query.row(q) - reference.row(r)).squaredNorm(), r};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.begin() + static_cast<long>(count));
    for (Index j = 0; j < k; ++j) out.indices(q, j) = cand[static_cast<std::size_t>(j)].second;
  }
  return out;
}

IndexList nearest_neighbor(const Mat& query, const Mat& reference) {
  const NeighborIndex nn = knn(query, reference, 1, false);
  IndexList out(static_cast<std::size_t>(query.rows()));
  for (Index i = 0; i < query.rows(); ++i) out[static_cast<std::size_t>(i)] = nn.indices(i, 0);
  return out;
}

ConnectivityReport connectivity(const TriangleMesh& mesh) {
  const Index n = mesh.vertex_count();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  std::vector<char> touched(static_cast<std::size_t>(n), 0);
  for (auto [a, b] : mesh_edges(mesh)) {
    touched[static_cast<std::size_t>(a)] = touched[static_cast<std::size_t>(b)] = 1;
    const Index ra = find(a), rb = find(b);
    if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
  }
  ConnectivityReport report;
  for (Index i = 0; i < n; ++i) {
    if (find(i) == i) ++report.components;
    if (!touched[static_cast<std::size_t>(i)]) report.isolated_vertices.push_back(i);
  }
  return report;
}

GeodesicMatrix graph_geodesics(const Mat& vertices,
                               const std::vector<std::pair<Index, Index>>& edges) {
  const Adjacency adj = build_adjacency(vertices, edges);
  const Index n = vertices.rows();
  GeodesicMatrix out;
  out.dist.resize(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t s) {
    dijkstra_row(adj, static_cast<Index>(s), out.dist.row(static_cast<Index>(s)).data());
  });
  // Rows are computed independently; symmetrize to remove summation-order
  // differences between d(p, q) and d(q, p).
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = std::min(out.dist(i, j), out.dist(j, i));
      out.dist(i, j) = out.dist(j, i) = d;
    }
  }
  return out;
}

GeodesicMatrix geodesics_dijkstra(const TriangleMesh& mesh, Index vertex_cap) {
  require(mesh.vertex_count() <= vertex_cap, ErrorCode::kSize,
          "geodesics_dijkstra: vertex count exceeds cap");
  return graph_geodesics(mesh.vertices, mesh_edges(mesh));
}

GeodesicMatrix knn_graph_geodesics(const Mat& positions, Index k) {
  const NeighborIndex nn = knn(positions, positions, std::min(k, positions.rows() - 1), true);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < nn.size(); ++i) {
    for (Index j = 0; j < nn.k(); ++j) edges.emplace_back(i, nn.indices(i, j));
  }
  return graph_geodesics(positions, edges);
}

}  // namespace nie::geom
