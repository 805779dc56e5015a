// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "nie/ad/gradcheck.hpp"
#include "nie/ad/ops.hpp"
#include "nie/common/error.hpp"
#include "nie/embed/nie.hpp"
#include "nie/eval/metrics.hpp"
#include "nie/geom/shapes.hpp"
#include "unit/fixtures.hpp"

using namespace nie;
using namespace nie::embed;
using nie::testing::random_matrix;

namespace {

double eval_scalar(const std::function<ad::Var(ad::Tape&, ad::Var)>& f, const Mat& phi) {
  ad::Tape t;
  return f(t, t.constant(phi)).scalar();
}

PairList all_pairs(Index n) {
  PairList p;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) p.emplace_back(i, j);
  }
  return p;
}

Mat random_metric(Index n, std::uint64_t seed) {
  const Mat x = random_matrix(n, 3, seed);
  return pairwise_distances(x, x);
}

// Oracle: naive per-source KL with explicit normalisation.
double naive_kl(const Mat& phi, const Mat& geo, const IndexList& sources, double alpha) {
  double total = 0.0;
  for (Index p : sources) {
    double ze = 0.0, zs = 0.0;
    for (Index q = 0; q < phi.rows(); ++q) {
      if (q == p) continue;
      ze += std::exp(-alpha * (phi.row(p) - phi.row(q)).norm());
      zs += std::exp(-alpha * geo(p, q));
    }
    for (Index q = 0; q < phi.rows(); ++q) {
      if (q == p) continue;
      const double pe = std::exp(-alpha * (phi.row(p) - phi.row(q)).norm()) / ze;
      const double ps = std::exp(-alpha * geo(p, q)) / zs;
      total += pe * std::log(pe / ps);
    }
  }
  return total / static_cast<double>(sources.size());
}

}  // namespace

TEST_CASE("relative geodesic loss") {
  SUBCASE("exact embedding of a flat strip") {
    const geom::Shape flat = geom::make_strip(0.0);
    const Mat phi = eval::mds_classical(flat.geo, 2).embedding;
    const double v = eval_scalar([&](ad::Tape&, ad::Var p) { return relative_geodesic_loss(p, flat.geo.dist, all_pairs(phi.rows())); }, phi);
    CHECK(v < 1e-10);
  }
  SUBCASE("single pair formula") {
    Mat phi = Mat::Zero(2, 2);
    phi(1, 0) = 1.1;
    Mat geo(2, 2);
    geo << 0, 1, 1, 0;
    const double v = eval_scalar([&](ad::Tape&, ad::Var p) { return relative_geodesic_loss(p, geo, {{0, 1}}); }, phi);
    CHECK(v == doctest::Approx(0.01).epsilon(1e-12));
  }
  SUBCASE("naive double loop oracle with floor") {
    const Mat phi = random_matrix(40, 5, 1);
    Mat geo = random_metric(40, 2);
    geo(3, 7) = geo(7, 3) = 5e-5;  // below the floor: skipped
    double total = 0.0;
    Index count = 0;
    for (Index i = 0; i < 40; ++i) {
      for (Index j = i + 1; j < 40; ++j) {
        if (geo(i, j) <= 1e-4) continue;
        const double e = (phi.row(i) - phi.row(j)).norm();
        total += (e - geo(i, j)) * (e - geo(i, j)) / (geo(i, j) * geo(i, j));
        ++count;
      }
    }
    const double v = eval_scalar([&](ad::Tape&, ad::Var p) { return relative_geodesic_loss(p, geo, all_pairs(40)); }, phi);
    CHECK(std::abs(v - total / static_cast<double>(count)) < 1e-12);
  }
  SUBCASE("empty pair set") {
    ad::Tape t;
    CHECK_THROWS_AS(relative_geodesic_loss(t.constant(Mat::Zero(3, 2)), Mat::Zero(3, 3), {{0, 1}}), Error);
  }
}

TEST_CASE("kl loss") {
  SUBCASE("matching distances give zero") {
    const Mat x = random_matrix(30, 3, 5);
    const Mat geo = pairwise_distances(x, x);
    const double v = eval_scalar([&](ad::Tape&, ad::Var p) { return kl_loss(p, geo, {0, 4, 9}, 10.0); }, x);
    CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("two-point distribution") {
    // Source 0 sees points 1 and 2 at equal embedded distance; target
    // probabilities 0.9 / 0.1 follow from d_S(0,2) - d_S(0,1) = ln 9.
    Mat phi = Mat::Zero(3, 2);
    phi(1, 0) = 1.0;
    phi(2, 1) = 1.0;
    Mat geo = Mat::Zero(3, 3);
    geo(0, 1) = geo(1, 0) = 1.0;
    geo(0, 2) = geo(2, 0) = 1.0 + std::log(9.0);
    geo(1, 2) = geo(2, 1) = 1.0;
    const double v = eval_scalar([&](ad::Tape&, ad::Var p) { return kl_loss(p, geo, {0}, 1.0); }, phi);
    const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    CHECK(v == doctest::Approx(expected).epsilon(1e-12));
    CHECK(v == doctest::Approx(0.5108).epsilon(1e-4));
  }
  SUBCASE("naive per-source oracle") {
    const Mat phi = random_matrix(35, 4, 6);
    const Mat geo = random_metric(35, 7);
    const IndexList sources{0, 3, 17, 34, 20};
    const double v = eval_scalar([&](ad::Tape&, ad::Var p) { return kl_loss(p, geo, sources, 10.0); }, phi);
    CHECK(std::abs(v - naive_kl(phi, geo, sources, 10.0)) < 1e-10);
  }
}

TEST_CASE("bijectivity loss") {
  const Index m = 12, k = 5;
  // Widely spread base points, each with a close twin: FPS picks one of each
  // pair first, so the two halves are mutual nearest neighbours.
  const Mat base = 10.0 * random_matrix(m, 3, 9);
  Mat cloud(2 * m, 3);
  cloud.topRows(m) = base;
  cloud.bottomRows(m) = base.array() + 1e-3;
  const BijectivitySplit split = make_bijectivity_split(cloud, m, 4);
  for (Index i = 0; i < m; ++i) {
    const Index a = split.a[static_cast<std::size_t>(i)];
    const Index twin = split.b[static_cast<std::size_t>(split.t_ab[static_cast<std::size_t>(i)])];
    CHECK(twin % m == a % m);
  }
  const Mat q = testing::random_rotation(m, 10).leftCols(k);
  Mat phi(2 * m, k);
  for (Index i = 0; i < m; ++i) {
    phi.row(i) = q.row(i);
    phi.row(m + i) = q.row(i);
  }
  auto loss_of = [&](const Mat& p) {
    return eval_scalar([&](ad::Tape&, ad::Var v) { return bijectivity_loss(v, split); }, p);
  };
  CHECK(loss_of(phi) < 1e-6);

  Mat deficient = random_matrix(2 * m, k, 11);
  deficient.col(2).setZero();
  CHECK(loss_of(deficient) >= 2.0);

  const Mat noisy = random_matrix(2 * m, k, 12);
  const Mat r = testing::random_rotation(k, 13);
  CHECK(std::abs(loss_of(noisy) - loss_of(noisy * r)) < 1e-8);

  CHECK_THROWS_AS(make_bijectivity_split(cloud, m + 1, 0), Error);
}

TEST_CASE("total loss composition") {
  const geom::Shape s = geom::make_strip(1.0, {10, 5, 2.0});
  const Mat phi = random_matrix(50, 6, 14);
  NieTrainConfig cfg;
  cfg.pair_count = 500;
  cfg.kl_sources = 8;
  const NieLossInputs in = sample_loss_inputs(s.cloud, cfg, 6, 3);
  auto total = [&](const NieLossWeights& w) {
    ad::Tape t;
    return nie_total_loss(t.constant(phi), s.geo.dist, in, w, 10.0).total.scalar();
  };
  CHECK(total({0, 0, 0}) == 0.0);
  const double lg = eval_scalar([&](ad::Tape&, ad::Var p) { return relative_geodesic_loss(p, s.geo.dist, in.pairs); }, phi);
  const double lkl = eval_scalar([&](ad::Tape&, ad::Var p) { return kl_loss(p, s.geo.dist, in.kl_sources, 10.0); }, phi);
  const double lb = eval_scalar([&](ad::Tape&, ad::Var p) { return bijectivity_loss(p, in.split); }, phi);
  CHECK(total({1, 0, 0}) == lg);
  CHECK(std::abs(total({1, 1, 0.5}) - (lg + lkl + 0.5 * lb)) < 1e-12);

  SUBCASE("finite-difference check of the composite loss") {
    const double err = ad::gradient_error(
        [&](ad::Tape&, const std::vector<ad::Var>& v) {
          return nie_total_loss(v[0], s.geo.dist, in, NieLossWeights{}, 10.0).total;
        },
        {phi});
    CHECK(err < 1e-3);
  }
  SUBCASE("rigid and orthogonal invariances") {
    const Mat r = testing::random_rotation(6, 15);
    const Eigen::RowVectorXd shift = random_matrix(1, 6, 16);
    const Mat moved = (phi * r).rowwise() + shift;
    const double lg2 = eval_scalar([&](ad::Tape&, ad::Var p) { return relative_geodesic_loss(p, s.geo.dist, in.pairs); }, moved);
    const double lkl2 = eval_scalar([&](ad::Tape&, ad::Var p) { return kl_loss(p, s.geo.dist, in.kl_sources, 10.0); }, moved);
    const double lb2 = eval_scalar([&](ad::Tape&, ad::Var p) { return bijectivity_loss(p, in.split); }, phi * r);
    CHECK(std::abs(lg - lg2) < 1e-8);
    CHECK(std::abs(lkl - lkl2) < 1e-8);
    CHECK(std::abs(lb - lb2) < 1e-8);
  }
}

TEST_CASE("training on toy data") {
  net::BackboneConfig bb;
  bb.edgeconv_dims = {3, 6, 6, 8};
  bb.head_hidden = {6, 6};
  bb.out_dim = 4;
  bb.k = 4;
  const auto family = geom::make_strip_family(3, 0.0, 2.0, {10, 5, 2.0}, 3);
  std::vector<NieSample> data;
  for (const auto& s : family) data.push_back({s.cloud, s.geo});
  NieTrainConfig cfg;
  cfg.epochs = 2;
  cfg.pair_count = 400;
  cfg.kl_sources = 8;
  cfg.seed = 5;

  SUBCASE("one step: parameter gradients match finite differences") {
    const ad::ParameterSet params = net::init_backbone(bb, 2);
    const net::NeighborAssignment assign = net::modified_neighbor_assignment(data[0].cloud, bb);
    const NieLossInputs in = sample_loss_inputs(data[0].cloud, cfg, bb.out_dim, 9);
    const NieStep step = nie_loss_and_grad(data[0], assign, params, bb, cfg, in);
    CHECK(std::isfinite(step.total));
    std::vector<Mat> inputs;
    for (const auto& name : params.names()) inputs.push_back(params.at(name));
    const double err = ad::gradient_error(
        [&](ad::Tape& tape, const std::vector<ad::Var>& v) {
          net::VarMap vars;
          for (std::size_t i = 0; i < v.size(); ++i) vars[params.names()[i]] = v[i];
          const ad::Var phi = net::backbone_forward(tape, data[0].cloud, assign, vars, bb);
          return nie_total_loss(phi, data[0].geo.dist, in, cfg.weights, cfg.alpha_kl).total;
        },
        inputs);
    CHECK(err < 1e-3);
    for (std::size_t i = 0; i < params.names().size(); ++i) {
      CHECK(step.grads.count(params.names()[i]) == 1);
    }
  }
  SUBCASE("bit-identical reruns and a per-epoch log") {
    std::vector<EpochLog> log;
    const NieModel a = train_nie(data, bb, cfg, &log);
    const NieModel b = train_nie(data, bb, cfg);
    REQUIRE(log.size() == 2);
    CHECK(log[0].epoch == 1);
    CHECK(std::isfinite(log[1].total));
    CHECK(a.step == 2);
    for (const auto& name : a.params.names()) CHECK(a.params.at(name) == b.params.at(name));
    CHECK(log[0].format().rfind("epoch=1 lr=", 0) == 0);
  }
  SUBCASE("configuration errors") {
    NieTrainConfig bad = cfg;
    bad.weights.lambda2 = -1.0;
    CHECK_THROWS_AS(train_nie(data, bb, bad), Error);
    CHECK_THROWS_AS(train_nie({}, bb, cfg), Error);
  }
}

TEST_CASE("model checkpoint round trip") {
  NieModel m;
  m.backbone.edgeconv_dims = {3, 4, 5};
  m.backbone.head_hidden = {3};
  m.backbone.out_dim = 2;
  m.params = net::init_backbone(m.backbone, 3);
  m.reference_diagonal = 1.0 / 3.0;
  m.step = 17;
  const auto dir = std::filesystem::temp_directory_path() / "nie_ckpt_test";
  std::filesystem::create_directories(dir);
  ad::save_checkpoint(dir / "model", to_checkpoint(m, "abc"));
  const ad::Checkpoint c = ad::load_checkpoint(dir / "model");
  CHECK(c.config_hash == "abc");
  const NieModel back = nie_from_checkpoint(c);
  CHECK(back.backbone.describe() == m.backbone.describe());
  CHECK(back.reference_diagonal == m.reference_diagonal);
  CHECK(back.step == 17);
  for (const auto& name : m.params.names()) CHECK(back.params.at(name) == m.params.at(name));
  ad::Checkpoint bare = c;
  bare.metadata.erase("reference_diagonal");
  CHECK_THROWS_AS(nie_from_checkpoint(bare), Error);
  std::filesystem::remove_all(dir);
}
