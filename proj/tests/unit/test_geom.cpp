// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nie/common/error.hpp"
#include "nie/common/random.hpp"
#include "nie/geom/corrupt.hpp"
#include "nie/geom/geometry.hpp"
#include "nie/geom/shapes.hpp"

using namespace nie;
using namespace nie::geom;

namespace {

Mat random_points(Index n, std::uint64_t seed, Index dims = 3) {
  Rng rng(seed);
  Mat m(n, dims);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = uniform_real(rng, 0.0, 1.0);
  return m;
}

PointCloud cloud_of(Mat positions) {
  PointCloud c;
  c.positions = std::move(positions);
  return c;
}

Mat line_points(std::initializer_list<double> xs) {
  Mat m = Mat::Zero(static_cast<Index>(xs.size()), 3);
  Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

double mean_relative(const Mat& approx, const Mat& exact) {
  double s = 0.0;
  Index c = 0;
  for (Index i = 0; i < exact.rows(); ++i) {
    for (Index j = 0; j < exact.cols(); ++j) {
      if (i == j) continue;
      s += std::abs(approx(i, j) - exact(i, j)) / exact(i, j);
      ++c;
    }
  }
  return s / static_cast<double>(c);
}

}  // namespace

TEST_CASE("normalize_unit_area scales a 2x2 sheet to side 1") {
  Mat v(4, 3);
  v << 0, 0, 0, 2, 0, 0, 2, 2, 0, 0, 2, 0;
  IndexMat t(2, 3);
  t << 0, 1, 2, 0, 2, 3;
  const TriangleMesh mesh = TriangleMesh::create(v, t);
  CHECK(mesh.total_area == doctest::Approx(4.0));
  auto [m2, c2] = normalize_unit_area(mesh, cloud_of(v));
  CHECK(m2.total_area == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c2.scale_factor == doctest::Approx(0.5));
  CHECK(c2.positions(2, 0) == doctest::Approx(1.0));

  auto [m3, c3] = normalize_unit_area(m2, cloud_of(m2.vertices));
  CHECK(c3.scale_factor == doctest::Approx(1.0));
}

TEST_CASE("normalize_unit_area on an icosphere") {
  const TriangleMesh ico = make_icosphere(2);
  PointCloud c = cloud_of(ico.vertices);
  auto [m, cloud] = normalize_unit_area(ico, c);
  CHECK(std::abs(m.total_area - 1.0) < 1e-9);
  CHECK(cloud.scale_factor == doctest::Approx(1.0 / std::sqrt(ico.total_area)));
}

TEST_CASE("degenerate meshes are rejected") {
  Mat v(3, 3);
  v << 0, 0, 0, 1, 0, 0, 2, 0, 0;
  IndexMat t(1, 3);
  t << 0, 1, 2;
  CHECK_THROWS_AS(TriangleMesh::create(v, t), Error);
}

TEST_CASE("farthest_point_sampling") {
  SUBCASE("collinear endpoints") {
    const IndexList s = farthest_point_sampling(line_points({0, 0.1, 0.5, 1}), 2, 0);
    CHECK(s == IndexList{0, 3});
  }
  SUBCASE("m = n is a permutation") {
    IndexList s = farthest_point_sampling(random_points(40, 3), 40, 5);
    CHECK(s.front() == 5);
    std::sort(s.begin(), s.end());
    CHECK(s == iota_indices(40));
  }
  SUBCASE("covering bound on a uniform square") {
    Mat p = random_points(1000, 11, 2);
    Mat p3 = Mat::Zero(1000, 3);
    p3.leftCols(2) = p;
    const IndexList s = farthest_point_sampling(p3, 100, 0);
    const Mat sel = take_rows(p3, s);
    const Mat d = pairwise_distances(sel, sel) + 10.0 * Mat::Identity(100, 100);
    CHECK(d.minCoeff() >= 0.5 * std::sqrt(1.0 / 100.0));
  }
  SUBCASE("prefix property") {
    const Mat p = random_points(300, 4);
    const IndexList full = farthest_point_sampling(p, 60, 7);
    const IndexList part = farthest_point_sampling(p, 25, 7);
    CHECK(std::equal(part.begin(), part.end(), full.begin()));
  }
  SUBCASE("m > n is a size error") {
    CHECK_THROWS_AS(farthest_point_sampling(random_points(5, 1), 6, 0), Error);
  }
  SUBCASE("duplicates are not re-picked") {
    Mat p = Mat::Zero(6, 3);
    p(5, 0) = 1.0;
    IndexList s = farthest_point_sampling(p, 6, 0);
    std::sort(s.begin(), s.end());
    CHECK(s == iota_indices(6));
  }
}

TEST_CASE("knn") {
  SUBCASE("line with self exclusion") {
    const Mat p = line_points({0, 1, 3});
    const NeighborIndex nb = knn(p, p, 1, true);
    CHECK(nb.indices(0, 0) == 1);
    CHECK(nb.indices(1, 0) == 0);
    CHECK(nb.indices(2, 0) == 1);
  }
  SUBCASE("self without exclusion") {
    const Mat p = random_points(20, 9);
    const NeighborIndex nb = knn(p, p, 1, false);
    for (Index i = 0; i < 20; ++i) CHECK(nb.indices(i, 0) == i);
  }
  SUBCASE("brute-force oracle") {
    const Mat p = random_points(200, 21);
    const NeighborIndex nb = knn(p, p, 8, true);
    for (Index i = 0; i < 200; ++i) {
      std::vector<std::pair<double, Index>> all;
      for (Index j = 0; j < 200; ++j) {
        if (j != i) all.emplace_back((p.row(i) - p.row(j)).squaredNorm(), j);
      }
      std::sort(all.begin(), all.end());
      for (Index k = 0; k < 8; ++k) CHECK(nb.indices(i, k) == all[static_cast<std::size_t>(k)].second);
    }
  }
  SUBCASE("K too large") {
    const Mat p = random_points(5, 2);
    CHECK_THROWS_AS(knn(p, p, 5, true), Error);
  }
}

TEST_CASE("geodesics_dijkstra small graphs") {
  SUBCASE("path with unit edges") {
    // Thin zig-zag triangles whose boundary edges form a unit path.
    Mat v(5, 3);
    v << 0, 0, 0, 1, 0, 0, 2, 0, 0, 3, 0, 0, 4, 0, 0;
    const GeodesicMatrix g = graph_geodesics(v, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    for (Index i = 0; i < 5; ++i) {
      for (Index j = 0; j < 5; ++j) CHECK(g.dist(i, j) == doctest::Approx(std::abs(i - j)));
    }
  }
  SUBCASE("regular tetrahedron") {
    Mat v(4, 3);
    v << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
    v /= std::sqrt(8.0);
    IndexMat t(4, 3);
    t << 0, 1, 2, 0, 3, 1, 0, 2, 3, 1, 3, 2;
    const GeodesicMatrix g = geodesics_dijkstra(TriangleMesh::create(v, t));
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 4; ++j) CHECK(g.dist(i, j) == doctest::Approx(i == j ? 0.0 : 1.0));
    }
  }
  SUBCASE("disconnected components give infinity") {
    Mat v(6, 3);
    v << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 0, 0, 6, 0, 0, 5, 1, 0;
    IndexMat t(2, 3);
    t << 0, 1, 2, 3, 4, 5;
    const TriangleMesh mesh = TriangleMesh::create(v, t);
    const GeodesicMatrix g = geodesics_dijkstra(mesh);
    CHECK(std::isinf(g.dist(0, 4)));
    CHECK(connectivity(mesh).components == 2);
    const Mat f = g.finite_for_loss();
    CHECK(f(0, 4) == doctest::Approx(1.5 * std::sqrt(2.0)));
  }
  SUBCASE("vertex cap") {
    const TriangleMesh ico = make_icosphere(2);
    CHECK_THROWS_AS(geodesics_dijkstra(ico, 10), Error);
  }
}

TEST_CASE("icosphere-642 Dijkstra against great-circle distances") {
  const TriangleMesh ico = make_icosphere(3);
  REQUIRE(ico.vertex_count() == 642);
  auto [mesh, cloud] = normalize_unit_area(ico, cloud_of(ico.vertices));
  const GeodesicMatrix g = geodesics_dijkstra(mesh);
  const double r = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  Mat exact(642, 642);
  for (Index i = 0; i < 642; ++i) {
    for (Index j = 0; j < 642; ++j) {
      const double c = std::clamp(ico.vertices.row(i).normalized().dot(ico.vertices.row(j).normalized()), -1.0, 1.0);
      exact(i, j) = r * std::acos(c);
    }
  }
  CHECK(mean_relative(g.dist, exact) < 0.10);
  CHECK((g.dist - exact).minCoeff() >= -1e-9);
}

TEST_CASE("geodesic matrix invariants on a strip mesh") {
  const Shape s = make_strip(1.0);
  const GeodesicMatrix g = geodesics_dijkstra(s.mesh);
  const Mat& d = g.dist;
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);
  const Mat euclid = pairwise_distances(s.mesh.vertices, s.mesh.vertices);
  CHECK((d - euclid).minCoeff() >= -1e-12);
  const Index n = d.rows();
  double worst = 0.0;
  for (Index i = 0; i < n; i += 7) {
    for (Index j = 0; j < n; ++j) {
      for (Index k = 0; k < n; k += 3) worst = std::max(worst, d(i, k) - d(i, j) - d(j, k));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("strip family") {
  const StripParams params;
  SUBCASE("flat strip geodesic is planar distance") {
    const Shape flat = make_strip(0.0, params);
    const Mat euclid = pairwise_distances(flat.cloud.positions, flat.cloud.positions);
    CHECK((flat.geo.dist - euclid).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(flat.mesh.total_area == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("exact isometry across bends") {
    const auto family = make_strip_family(6, 0.0, std::numbers::pi, params, 3);
    for (const auto& s : family) {
      CHECK(s.cloud.size() == params.nu * params.nv);
      CHECK((s.geo.dist - family.front().geo.dist).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("Dijkstra within 8 percent of analytic on 20 shapes") {
    const auto family = make_strip_family(20, 0.0, std::numbers::pi, params, 7);
    for (const auto& s : family) {
      const GeodesicMatrix g = geodesics_dijkstra(s.mesh);
      CHECK(mean_relative(g.dist, s.geo.dist) < 0.08);
    }
  }
  SUBCASE("degenerate resolution") {
    CHECK_THROWS_AS(make_strip(0.5, StripParams{1, 10, 3.0}), Error);
  }
}

TEST_CASE("articulated family") {
  const ArmParams params;
  const Shape straight = make_arm({0.0, 0.0}, params);
  const Shape again = make_arm({0.0, 0.0}, params);
  CHECK((straight.cloud.positions - again.cloud.positions).cwiseAbs().maxCoeff() == 0.0);
  const Shape bent = make_arm({std::numbers::pi / 2, 0.0}, params);
  CHECK(bent.cloud.size() == straight.cloud.size());
  CHECK(mean_relative(bent.geo.dist, straight.geo.dist) < 0.03);

  const auto f1 = make_articulated_family(20, -1.5, 1.5, params, 42);
  const auto f2 = make_articulated_family(20, -1.5, 1.5, params, 42);
  REQUIRE(f1.size() == 20);
  for (std::size_t i = 0; i < f1.size(); ++i) {
    CHECK((f1[i].cloud.positions - f2[i].cloud.positions).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(make_arm({3.1, 3.1}, params), Error);
  CHECK_THROWS_AS(make_arm({4.0, 0.0}, params), Error);
}

TEST_CASE("corruption operators") {
  const Shape s = make_strip(2.0);
  const PointCloud& c = s.cloud;
  SUBCASE("half keeps about half") {
    const Shape arm = make_arm({0.0, 0.0});
    for (const Eigen::Vector3d axis : {Eigen::Vector3d(0.3, 0.5, 0.8), Eigen::Vector3d(-0.7, 0.2, 0.4)}) {
      const auto h = corrupt_half(arm.cloud, axis);
      CHECK(std::abs(static_cast<double>(h.kept.size()) - arm.cloud.size() / 2.0) <= 0.1 * arm.cloud.size() / 2.0);
    }
    const auto hs = corrupt_half(c, Eigen::Vector3d(0, 0, 1));
    CHECK(std::abs(static_cast<double>(hs.kept.size()) - c.size() / 2.0) <= 0.1 * c.size() / 2.0);
  }
  SUBCASE("identities") {
    CHECK(corrupt_hole(c, 0, 100, 1).kept == iota_indices(c.size()));
    CHECK(corrupt_cut(c, 0.0, 1).kept == iota_indices(c.size()));
    const PointCloud n0 = add_gaussian_noise(c, 0.0, 5);
    CHECK((n0.positions - c.positions).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("hole removes neighbourhoods and maps back") {
    const auto h = corrupt_hole(c, 3, 20, 9);
    CHECK(h.cloud.size() <= c.size() - 20);
    CHECK(h.cloud.size() >= c.size() - 60);
    for (std::size_t i = 0; i < h.kept.size(); ++i) {
      CHECK(h.cloud.positions.row(static_cast<Index>(i)) == c.positions.row(h.kept[i]));
    }
    const auto h2 = corrupt_hole(c, 3, 20, 9);
    CHECK(h2.kept == h.kept);
  }
  SUBCASE("cut removes the requested fraction") {
    const auto cut = corrupt_cut(c, s.geo, 0.1, 4);
    CHECK(cut.cloud.size() == c.size() - static_cast<Index>(std::ceil(0.1 * c.size())));
    CHECK(corrupt_cut(c, s.geo, 0.1, 4).kept == cut.kept);
  }
  SUBCASE("over-aggressive removal") {
    CHECK_THROWS_AS(corrupt_hole(c, 10, c.size(), 1), Error);
  }
  SUBCASE("gaussian noise statistics") {
    Mat p = random_points(10000, 17);
    const PointCloud big = cloud_of(p);
    const PointCloud noisy = add_gaussian_noise(big, 0.01, 3);
    const Mat disp = noisy.positions - big.positions;
    const double sigma = 0.01 * bounding_box_diagonal(p);
    const double sd = std::sqrt(disp.squaredNorm() / static_cast<double>(disp.size()));
    CHECK(std::abs(sd - sigma) < 0.05 * sigma);
    const PointCloud again = add_gaussian_noise(big, 0.01, 3);
    CHECK((again.positions - noisy.positions).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("deduplicate keeps the lowest index") {
  Mat p(5, 3);
  p << 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 2, 0, 0;
  PointCloud c = cloud_of(p);
  const IndexList kept = deduplicate(c);
  CHECK(kept == IndexList{0, 1, 4});
  CHECK(c.size() == 3);
}
