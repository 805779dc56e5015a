// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/match/nim.hpp"

#include <spdlog/fmt/fmt.h>

#include <algorithm>
#include <sstream>

#include "nie/ad/ops.hpp"
#include "nie/common/error.hpp"
#include "nie/common/parallel.hpp"
#include "nie/common/random.hpp"
#include "nie/geom/geometry.hpp"

namespace nie::match {

using ad::Matrix;
using ad::Tape;
using ad::Var;

namespace {

void check_dims(Var p, Var p_tilde, const Mat& geo_x, const Mat& geo_y, const char* what) {
  const Index nx = geo_x.rows(), ny = geo_y.rows();
  require(geo_x.cols() == nx && geo_y.cols() == ny, ErrorCode::kShape,
          std::string(what) + ": geodesic matrices must be square");
  require(p.rows() == ny && p.cols() == nx && p_tilde.rows() == nx && p_tilde.cols() == ny,
          ErrorCode::kShape, std::string(what) + ": soft maps do not match the shapes");
}

// ||d - m d m^T||_F^2 / n^2
Var conjugation_residual(Var m, const Mat& d) {
  Tape& tape = m.tape();
  const Var dv = tape.constant(d);
  const Var r = ad::sub(dv, ad::matmul(ad::matmul(m, dv), ad::transpose(m)));
  const auto n = static_cast<double>(d.rows());
  return ad::scale(ad::squared_norm(r), 1.0 / (n * n));
}

// ||d_a - m d_b m^T||_F^2 / n_a^2
Var transfer_residual(Var m, const Mat& d_a, const Mat& d_b) {
  Tape& tape = m.tape();
  const Var r = ad::sub(tape.constant(d_a),
                        ad::matmul(ad::matmul(m, tape.constant(d_b)), ad::transpose(m)));
  const auto n = static_cast<double>(d_a.rows());
  return ad::scale(ad::squared_norm(r), 1.0 / (n * n));
}

}  // namespace

Var cyclic_loss(Var p, Var p_tilde, const Mat& geo_x, const Mat& geo_y) {
  check_dims(p, p_tilde, geo_x, geo_y, "cyclic_loss");
  return ad::add(conjugation_residual(ad::matmul(p_tilde, p), geo_x),
                 conjugation_residual(ad::matmul(p, p_tilde), geo_y));
}

Var isometric_loss(Var p, Var p_tilde, const Mat& geo_x, const Mat& geo_y) {
  check_dims(p, p_tilde, geo_x, geo_y, "isometric_loss");
  return ad::add(transfer_residual(p_tilde, geo_x, geo_y), transfer_residual(p, geo_y, geo_x));
}

DescLoss desc_loss(Var p, Var p_tilde, const Mat& geo_x, const Mat& geo_y) {
  const Var cyc = cyclic_loss(p, p_tilde, geo_x, geo_y);
  const Var iso = isometric_loss(p, p_tilde, geo_x, geo_y);
  DescLoss out;
  out.cyclic = cyc.scalar();
  out.isometric = iso.scalar();
  out.total = ad::add(iso, cyc);
  return out;
}

DescLoss pair_loss(Var phi_x, Var phi_y, Var g_x, Var g_y, const Mat& geo_x, const Mat& geo_y,
                   double alpha) {
  const auto [c, c_tilde] = fmap::map_from_features(phi_x, phi_y, g_x, g_y);
  const Var p_tilde = fmap::soft_correspondence(phi_x, phi_y, c, alpha);  // X -> Y
  const Var p = fmap::soft_correspondence(phi_y, phi_x, c_tilde, alpha);  // Y -> X
  return desc_loss(p, p_tilde, geo_x, geo_y);
}

void NimTrainConfig::validate() const {
  require(epochs >= 1 && batch_size >= 1, ErrorCode::kConfig, "nim: epochs and batch_size must be >= 1");
  require(lr_max >= lr_min && lr_min >= 0.0, ErrorCode::kConfig, "nim: need lr_max >= lr_min >= 0");
  require(alpha >= 0.0, ErrorCode::kConfig, "nim: alpha must be non-negative");
  require(loss_points >= 4, ErrorCode::kConfig, "nim: loss_points must be >= 4");
}

std::string NimTrainConfig::describe() const {
  std::ostringstream out;
  out << "epochs=" << epochs << ";batch_size=" << batch_size << ";lr=" << lr_max << "," << lr_min
      << ";alpha=" << alpha << ";loss_points=" << loss_points
      << ";fine_tune_nie=" << (fine_tune_nie ? 1 : 0) << ";seed=" << seed;
  return out.str();
}

std::string NimEpochLog::format() const {
  return fmt::format("epoch={} lr={:.6g} L_cyc={:.6g} L_iso={:.6g} total={:.6g}", epoch, lr, cyclic,
                     isometric, total);
}

namespace {

struct PairResult {
  DescLoss loss;
  double total = 0.0;
  ad::GradMap nim_grads;
  ad::GradMap nie_grads;
};

IndexList loss_subset(const geom::PointCloud& cloud, Index count, std::uint64_t seed) {
  if (cloud.size() <= count) return iota_indices(cloud.size());
  Rng rng(seed);
  return geom::farthest_point_sampling(cloud.positions, count, uniform_index(rng, cloud.size()));
}

}  // namespace

NimModel train_nim(const std::vector<NimSample>& dataset, embed::NieModel& nie,
                   const net::BackboneConfig& backbone, const NimTrainConfig& config,
                   std::vector<NimEpochLog>* log,
                   const std::function<void(const NimEpochLog&)>& on_epoch) {
  require(dataset.size() >= 2, ErrorCode::kData, "train_nim: need at least two shapes");
  require(nie.params.size() > 0, ErrorCode::kData, "train_nim: missing NIE checkpoint");
  backbone.validate();
  config.validate();
  require(backbone.out_dim >= nie.backbone.out_dim, ErrorCode::kConfig,
          "train_nim: descriptor dimension below embedding dimension");
  for (const auto& s : dataset) {
    s.cloud.validate();
    require(s.geo.size() == s.cloud.size(), ErrorCode::kShape, "train_nim: geodesic size mismatch");
  }

  NimModel model;
  model.backbone = backbone;
  model.params = net::init_backbone(backbone, derive_seed(config.seed, 11));

  const std::size_t count = dataset.size();
  std::vector<net::NeighborAssignment> nim_assign(count), nie_assign(count);
  std::vector<Mat> phi(count), geo(count);
  for (std::size_t i = 0; i < count; ++i) {
    nim_assign[i] = net::modified_neighbor_assignment(dataset[i].cloud, backbone);
    if (config.fine_tune_nie) {
      nie_assign[i] = net::modified_neighbor_assignment(dataset[i].cloud, nie.backbone);
    } else {
      phi[i] = embed::embed(nie, dataset[i].cloud);
    }
    geo[i] = dataset[i].geo.finite_for_loss();
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) pairs.emplace_back(i, j);
  }
  const auto n_pairs = static_cast<Index>(pairs.size());
  const Index steps_per_epoch = (n_pairs + config.batch_size - 1) / config.batch_size;
  const Index total_steps = config.epochs * steps_per_epoch;
  ad::AdamState adam, nie_adam;
  Rng order_rng(derive_seed(config.seed, 12));
  IndexList order = iota_indices(n_pairs);

  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_indices(order, order_rng);
    NimEpochLog entry;
    entry.epoch = epoch + 1;
    Index seen = 0;
    for (Index b = 0; b < steps_per_epoch; ++b) {
      const double lr = ad::cosine_lr(model.step, total_steps, config.lr_max, config.lr_min);
      entry.lr = lr;
      const Index first = b * config.batch_size;
      const Index last = std::min(n_pairs, first + config.batch_size);
      std::vector<PairResult> results(static_cast<std::size_t>(last - first));
      const std::uint64_t step_seed = derive_seed(config.seed, 5000 + static_cast<std::uint64_t>(model.step));
      try {
        parallel_for(results.size(), [&](std::size_t i) {
          const auto [ix, iy] = pairs[static_cast<std::size_t>(order[static_cast<std::size_t>(first) + i])];
          const std::uint64_t item_seed = derive_seed(step_seed, i);
          const IndexList sx = loss_subset(dataset[ix].cloud, config.loss_points, derive_seed(item_seed, 1));
          const IndexList sy = loss_subset(dataset[iy].cloud, config.loss_points, derive_seed(item_seed, 2));
          Tape tape;
          const net::VarMap nim_vars = model.params.bind(tape, true);
          const Var g_x = ad::gather_rows(
              net::backbone_forward(tape, dataset[ix].cloud, nim_assign[ix], nim_vars, backbone), sx);
          const Var g_y = ad::gather_rows(
              net::backbone_forward(tape, dataset[iy].cloud, nim_assign[iy], nim_vars, backbone), sy);
          Var phi_x, phi_y;
          if (config.fine_tune_nie) {
            net::VarMap nie_vars;
            for (const auto& name : nie.params.names()) nie_vars[name] = tape.leaf(nie.params.at(name), "nie/" + name);
            phi_x = ad::gather_rows(net::backbone_forward(tape, dataset[ix].cloud, nie_assign[ix], nie_vars, nie.backbone), sx);
            phi_y = ad::gather_rows(net::backbone_forward(tape, dataset[iy].cloud, nie_assign[iy], nie_vars, nie.backbone), sy);
          } else {
            phi_x = tape.constant(take_rows(phi[ix], sx));
            phi_y = tape.constant(take_rows(phi[iy], sy));
          }
          PairResult& r = results[i];
          r.loss = pair_loss(phi_x, phi_y, g_x, g_y, take_block(geo[ix], sx), take_block(geo[iy], sy),
                             config.alpha);
          r.total = r.loss.total.scalar();
          tape.backward(r.loss.total);
          for (auto& [name, g] : tape.named_grads()) {
            if (name.rfind("nie/", 0) == 0) {
              r.nie_grads.emplace(name.substr(4), std::move(g));
            } else {
              r.nim_grads.emplace(name, std::move(g));
            }
          }
        });
      } catch (const Error& e) {
        fail(e.code(), fmt::format("train_nim: aborted at epoch {} step {}: {}", epoch + 1, model.step, e.what()));
      }
      ad::GradMap grads, nie_grads;
      const double weight = 1.0 / static_cast<double>(results.size());
      for (const auto& r : results) {
        ad::accumulate_grads(grads, r.nim_grads, weight);
        ad::accumulate_grads(nie_grads, r.nie_grads, weight);
        entry.cyclic += r.loss.cyclic;
        entry.isometric += r.loss.isometric;
        entry.total += r.total;
        ++seen;
      }
      ad::adam_step(model.params, grads, adam, lr);
      if (config.fine_tune_nie) ad::adam_step(nie.params, nie_grads, nie_adam, lr);
      ++model.step;
    }
    const double inv = 1.0 / static_cast<double>(seen);
    entry.cyclic *= inv;
    entry.isometric *= inv;
    entry.total *= inv;
    if (log) log->push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return model;
}

geom::GeodesicMatrix approx_geodesics(const geom::PointCloud& cloud, const embed::NieModel& nie) {
  const Mat phi = embed::embed(nie, cloud);
  geom::GeodesicMatrix out;
  out.dist = pairwise_distances(phi, phi);
  out.dist = 0.5 * (out.dist + out.dist.transpose()).eval();
  out.dist.diagonal().setZero();
  return out;
}

ad::Checkpoint to_checkpoint(const NimModel& model, const std::string& config_hash) {
  ad::Checkpoint c;
  c.params = model.params;
  c.step = model.step;
  c.config_hash = config_hash;
  c.metadata["backbone"] = model.backbone.describe();
  return c;
}

NimModel nim_from_checkpoint(const ad::Checkpoint& checkpoint) {
  require(checkpoint.metadata.count("backbone") == 1, ErrorCode::kData,
          "NIM checkpoint: missing metadata backbone");
  NimModel m;
  m.backbone = net::BackboneConfig::parse(checkpoint.metadata.at("backbone"));
  m.params = checkpoint.params;
  m.step = checkpoint.step;
  return m;
}

Mat describe(const NimModel& nim, const geom::PointCloud& cloud) {
  return net::backbone_apply(cloud, nim.params, nim.backbone);
}

InferredMap infer_map_from_features(const Mat& phi_x, const Mat& phi_y, const Mat& g_x,
                                    const Mat& g_y, double alpha) {
  InferredMap out;
  const fmap::FeatureMaps maps = fmap::map_from_features(phi_x, phi_y, g_x, g_y);
  out.c = maps.c;
  out.c_tilde = maps.c_tilde;
  out.x_to_y = fmap::decode_map(maps.c, phi_y, phi_x);
  out.y_to_x = fmap::decode_map(maps.c_tilde, phi_x, phi_y);
  out.entropy_xy = fmap::soft_correspondence_entropy(phi_x, phi_y, maps.c, alpha);
  out.entropy_yx = fmap::soft_correspondence_entropy(phi_y, phi_x, maps.c_tilde, alpha);
  for (auto& w : fmap::map_health(maps.c, out.x_to_y, phi_y.rows())) out.warnings.push_back("x_to_y: " + w);
  for (auto& w : fmap::map_health(maps.c_tilde, out.y_to_x, phi_x.rows())) out.warnings.push_back("y_to_x: " + w);
  return out;
}

InferredMap infer_map(const geom::PointCloud& cloud_x, const geom::PointCloud& cloud_y,
                      const embed::NieModel& nie, const NimModel& nim, double alpha) {
  return infer_map_from_features(embed::embed(nie, cloud_x), embed::embed(nie, cloud_y),
                                 describe(nim, cloud_x), describe(nim, cloud_y), alpha);
}

}  // namespace nie::match
