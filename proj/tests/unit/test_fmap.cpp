// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include <numbers>

#include "doctest.h"
#include "nie/ad/gradcheck.hpp"
#include "nie/ad/ops.hpp"
#include "nie/common/error.hpp"
#include "nie/fmap/fmap.hpp"
#include "nie/geom/shapes.hpp"
#include "unit/fixtures.hpp"

using namespace nie;
using namespace nie::fmap;
using nie::testing::random_matrix;

namespace {

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

LMat to_long(const Mat& m) { return m.cast<long double>(); }

}  // namespace

TEST_CASE("pinv_reg") {
  SUBCASE("orthonormal columns") {
    const Mat q = testing::random_rotation(30, 4).leftCols(10);
    CHECK((pinv_reg(q, 1e-12) - q.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((pinv_reg(q) - q.transpose()).cwiseAbs().maxCoeff() < 1e-6 * 10);
  }
  SUBCASE("left inverse") {
    const Mat m = random_matrix(60, 8, 2);
    CHECK((pinv_reg(m) * m - Mat::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-4);
  }
  SUBCASE("high-precision oracle") {
    const Mat m = random_matrix(100, 20, 3);
    const LMat ml = to_long(m);
    const LMat pinv = (ml.transpose() * ml).inverse() * ml.transpose();
    const Mat ours = pinv_reg(m);
    CHECK((to_long(ours) - pinv).cwiseAbs().maxCoeff() < 1e-5);
  }
  SUBCASE("non-finite input") {
    Mat m = random_matrix(5, 2, 1);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(pinv_reg(m), Error);
  }
  SUBCASE("differentiable paths pass the finite-difference check") {
    const Mat m = random_matrix(9, 4, 5);
    const auto f1 = ad::project_output([](ad::Tape&, const std::vector<ad::Var>& v) { return pinv_reg(v[0]); }, 4, 9, 6);
    CHECK(ad::gradient_error(f1, {m}) < 1e-4);
    const Mat a = random_matrix(4, 9, 7);
    const auto f2 = ad::project_output([](ad::Tape&, const std::vector<ad::Var>& v) { return pinv_reg_square(v[0]); }, 9, 4, 8);
    CHECK(ad::gradient_error(f2, {a}) < 1e-4);
  }
}

TEST_CASE("encode_map") {
  const Mat phi = random_matrix(50, 6, 10);
  SUBCASE("identity") {
    CHECK((encode_map(iota_indices(50), phi, phi) - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-5);
  }
  SUBCASE("permutation consistency") {
    IndexList perm = iota_indices(50);
    Rng rng(3);
    shuffle_indices(perm, rng);
    const Mat phi_y = take_rows(phi, perm);
    // Y point j corresponds to X point perm[j].
    CHECK((encode_map(perm, phi, phi_y) - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-5);
  }
  SUBCASE("dense oracle") {
    const Mat phi_y = random_matrix(40, 6, 11);
    Rng rng(4);
    IndexList pi(40);
    for (auto& t : pi) t = uniform_index(rng, 50);
    LMat pmat = LMat::Zero(40, 50);
    for (Index j = 0; j < 40; ++j) pmat(j, pi[static_cast<std::size_t>(j)]) = 1;
    const LMat py = to_long(phi_y);
    const LMat gram = py.transpose() * py + 1e-6L * LMat::Identity(6, 6);
    const LMat expected = gram.inverse() * py.transpose() * pmat * to_long(phi);
    CHECK((to_long(encode_map(pi, phi, phi_y)) - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("decode_map") {
  const Mat phi = random_matrix(40, 5, 20);
  SUBCASE("identity") {
    CHECK(decode_map(Mat::Identity(5, 5), phi, phi) == iota_indices(40));
  }
  SUBCASE("zero map collapses to the row nearest the origin") {
    const PointMap m = decode_map(Mat::Zero(5, 5), phi, phi);
    Index nearest = 0;
    phi.rowwise().squaredNorm().minCoeff(&nearest);
    for (Index t : m) CHECK(t == nearest);
    CHECK_FALSE(map_health(Mat::Zero(5, 5), m, 40).empty());
    CHECK(map_health(Mat::Identity(5, 5), iota_indices(40), 40).empty());
  }
  SUBCASE("round trip on an isometric strip pair") {
    const geom::Shape x = geom::make_strip(0.4);
    const geom::Shape y = geom::make_strip(2.5);
    const IndexList landmarks = geom::farthest_point_sampling(x.cloud.positions, 20, 0);
    IndexList perm = iota_indices(y.cloud.size());
    Rng rng(8);
    shuffle_indices(perm, rng);
    geom::GeodesicMatrix gy{take_block(y.geo.dist, perm)};
    // Landmarks on Y are the same surface points, relabelled.
    IndexList inv(perm.size());
    for (std::size_t j = 0; j < perm.size(); ++j) inv[static_cast<std::size_t>(perm[j])] = static_cast<Index>(j);
    IndexList landmarks_y;
    for (Index l : landmarks) landmarks_y.push_back(inv[static_cast<std::size_t>(l)]);
    const Mat phi_x = testing::landmark_features(x.geo, landmarks);
    const Mat phi_y = testing::landmark_features(gy, landmarks_y);
    const PointMap recovered = decode_map(encode_map(perm, phi_x, phi_y), phi_x, phi_y);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < perm.size(); ++j) hits += recovered[j] == perm[j];
    CHECK(static_cast<double>(hits) >= 0.95 * static_cast<double>(perm.size()));
  }
  SUBCASE("orthogonal equivariance") {
    const Mat phi_y = phi + 0.01 * random_matrix(40, 5, 21);
    const Mat r = testing::random_rotation(5, 22);
    const Mat c = encode_map(iota_indices(40), phi, phi_y);
    const Mat cr = encode_map(iota_indices(40), phi * r, phi_y * r);
    CHECK((cr - r.transpose() * c * r).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(decode_map(cr, phi * r, phi_y * r) == decode_map(c, phi, phi_y));
  }
}

TEST_CASE("map_from_features") {
  const Mat phi = random_matrix(100, 20, 30);
  const Mat g = random_matrix(100, 40, 31);
  SUBCASE("self map is the identity") {
    const FeatureMaps m = map_from_features(phi, phi, g, g);
    CHECK((m.c - Mat::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-4);
    CHECK((m.c_tilde - Mat::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-4);
  }
  const Mat phi_y = random_matrix(90, 20, 32);
  const Mat g_y = random_matrix(90, 40, 33);
  SUBCASE("common feature scale cancels up to the ridge term") {
    const FeatureMaps a = map_from_features(phi, phi_y, g, g_y);
    const FeatureMaps b = map_from_features(phi, phi_y, 3.0 * g, 3.0 * g_y);
    CHECK((a.c - b.c).cwiseAbs().maxCoeff() < 1e-4);
    CHECK((a.c_tilde - b.c_tilde).cwiseAbs().maxCoeff() < 1e-4);
  }
  SUBCASE("high-precision oracle") {
    const LMat px = to_long(phi), py = to_long(phi_y);
    const LMat ax = (px.transpose() * px + 1e-6L * LMat::Identity(20, 20)).inverse() * px.transpose() * to_long(g);
    const LMat ay = (py.transpose() * py + 1e-6L * LMat::Identity(20, 20)).inverse() * py.transpose() * to_long(g_y);
    const LMat c = ax * ay.transpose() * (ay * ay.transpose() + 1e-6L * LMat::Identity(20, 20)).inverse();
    const LMat ct = ay * ax.transpose() * (ax * ax.transpose() + 1e-6L * LMat::Identity(20, 20)).inverse();
    const FeatureMaps m = map_from_features(phi, phi_y, g, g_y);
    CHECK((to_long(m.c) - c).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((to_long(m.c_tilde) - ct).cwiseAbs().maxCoeff() < 1e-5);
  }
  SUBCASE("feature dimension below embedding dimension") {
    CHECK_THROWS_AS(map_from_features(phi, phi_y, g.leftCols(10), g_y.leftCols(10)), Error);
  }
}

TEST_CASE("soft_correspondence") {
  const Mat phi_x = random_matrix(30, 4, 40);
  const Mat phi_y = random_matrix(25, 4, 41);
  const Mat c = Mat::Identity(4, 4) + 0.1 * random_matrix(4, 4, 42);
  SUBCASE("rows are distributions") {
    const Mat p = soft_correspondence(phi_x, phi_y, c);
    CHECK(p.rows() == 30);
    CHECK(p.cols() == 25);
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() <= 1.0);
  }
  SUBCASE("alpha zero is uniform") {
    const Mat p = soft_correspondence(phi_x, phi_y, c, 0.0);
    CHECK((p.array() - 1.0 / 25.0).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("large alpha is the decoded nearest neighbour") {
    const Mat p = soft_correspondence(phi_x, phi_y, c, 1e6);
    // Rows of phi_x * c matched against phi_y: decode with phi_y as source.
    const PointMap nn = decode_map(c, phi_y, phi_x);
    for (Index i = 0; i < 30; ++i) CHECK(p(i, nn[static_cast<std::size_t>(i)]) == doctest::Approx(1.0));
  }
  SUBCASE("argmax at alpha 30 is the decoded nearest neighbour") {
    const Mat p = soft_correspondence(phi_x, phi_y, c, 30.0);
    const PointMap nn = decode_map(c, phi_y, phi_x);
    for (Index i = 0; i < 30; ++i) {
      Index arg = 0;
      p.row(i).maxCoeff(&arg);
      CHECK(arg == nn[static_cast<std::size_t>(i)]);
    }
  }
  SUBCASE("tape version agrees and streaming entropy matches") {
    ad::Tape t;
    const Mat pv = soft_correspondence(t.constant(phi_x), t.constant(phi_y), t.constant(c), 30.0).value();
    const Mat p = soft_correspondence(phi_x, phi_y, c, 30.0);
    CHECK((pv - p).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(soft_correspondence_entropy(phi_x, phi_y, c, 30.0) == doctest::Approx(mean_row_entropy(p)).epsilon(1e-10));
  }
}
