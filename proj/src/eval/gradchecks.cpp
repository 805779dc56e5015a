// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/eval/gradchecks.hpp"

#include "nie/embed/nie.hpp"
#include "nie/geom/shapes.hpp"
#include "nie/match/nim.hpp"

namespace nie::eval {

namespace {

net::BackboneConfig toy_backbone(Index out_dim) {
  net::BackboneConfig b;
  b.edgeconv_dims = {3, 6, 6, 8};
  b.head_hidden = {6};
  b.out_dim = out_dim;
  b.k = 4;
  b.n_s = 30;
  return b;
}

std::vector<Mat> values_of(const ad::ParameterSet& params) {
  std::vector<Mat> out;
  for (const auto& name : params.names()) out.push_back(params.at(name));
  return out;
}

net::VarMap as_var_map(const ad::ParameterSet& params, const std::vector<ad::Var>& v) {
  net::VarMap m;
  for (std::size_t i = 0; i < v.size(); ++i) m[params.names()[i]] = v[i];
  return m;
}

}  // namespace

std::vector<ad::GradCheckResult> loss_gradchecks(std::uint64_t seed, double tolerance) {
  std::vector<ad::GradCheckResult> out;
  const geom::StripParams sp{8, 5, 2.0};
  const geom::Shape x = geom::make_strip(0.8, sp);
  const geom::Shape y = geom::make_strip(1.9, sp);

  {
    const net::BackboneConfig bb = toy_backbone(4);
    const ad::ParameterSet params = net::init_backbone(bb, seed);
    const net::NeighborAssignment assign = net::modified_neighbor_assignment(x.cloud, bb);
    embed::NieTrainConfig cfg;
    cfg.pair_count = 300;
    cfg.kl_sources = 6;
    const embed::NieLossInputs in = embed::sample_loss_inputs(x.cloud, cfg, bb.out_dim, seed + 1);
    const double err = ad::gradient_error(
        [&](ad::Tape& tape, const std::vector<ad::Var>& v) {
          const ad::Var phi = net::backbone_forward(tape, x.cloud, assign, as_var_map(params, v), bb);
          return embed::nie_total_loss(phi, x.geo.dist, in, cfg.weights, cfg.alpha_kl).total;
        },
        values_of(params));
    out.push_back({"loss:nie_total", err, tolerance, err < tolerance});
  }
  {
    const net::BackboneConfig nie_bb = toy_backbone(3);
    const net::BackboneConfig desc_bb = toy_backbone(5);
    const ad::ParameterSet nie_params = net::init_backbone(nie_bb, seed + 2);
    const ad::ParameterSet params = net::init_backbone(desc_bb, seed + 3);
    const Mat phi_x = net::backbone_apply(x.cloud, nie_params, nie_bb);
    const Mat phi_y = net::backbone_apply(y.cloud, nie_params, nie_bb);
    const net::NeighborAssignment ax = net::modified_neighbor_assignment(x.cloud, desc_bb);
    const net::NeighborAssignment ay = net::modified_neighbor_assignment(y.cloud, desc_bb);
    const double err = ad::gradient_error(
        [&](ad::Tape& tape, const std::vector<ad::Var>& v) {
          const net::VarMap m = as_var_map(params, v);
          const ad::Var gx = net::backbone_forward(tape, x.cloud, ax, m, desc_bb);
          const ad::Var gy = net::backbone_forward(tape, y.cloud, ay, m, desc_bb);
          return match::pair_loss(tape.constant(phi_x), tape.constant(phi_y), gx, gy, x.geo.dist,
                                  y.geo.dist, 5.0)
              .total;
        },
        values_of(params));
    out.push_back({"loss:descriptor", err, tolerance, err < tolerance});
  }
  return out;
}

}  // namespace nie::eval
