// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nie/ad/params.hpp"
#include "nie/ad/tape.hpp"
#include "nie/geom/types.hpp"
#include "nie/net/backbone.hpp"

namespace nie::embed {

using PairList = std::vector<std::pair<Index, Index>>;

constexpr double kGeodesicFloor = 1e-4;

/// Mean over pairs with d_S > floor of (d_E - d_S)^2 / d_S^2.
ad::Var relative_geodesic_loss(ad::Var phi, const Mat& geo, const PairList& pairs,
                               double floor = kGeodesicFloor);

/// Mean over pairs with d_S > floor of (d_E - d_S)^2. Ablation only.
ad::Var absolute_geodesic_loss(ad::Var phi, const Mat& geo, const PairList& pairs,
                               double floor = kGeodesicFloor);

/// Mean over sources p of KL(P_E^p || P_S^p), where P^p(q) is proportional to
/// exp(-alpha d(p, q)) over q != p.
ad::Var kl_loss(ad::Var phi, const Mat& geo, const IndexList& sources, double alpha_kl);

/// Two disjoint FPS halves of a cloud with nearest-neighbour maps between them.
struct BijectivitySplit {
  IndexList a;     // first m FPS points
  IndexList b;     // next m FPS points
  IndexList t_ba;  // for each b point, position in `a` of its nearest a point
  IndexList t_ab;  // for each a point, position in `b` of its nearest b point
};

BijectivitySplit make_bijectivity_split(const Mat& positions, Index m, std::uint64_t seed);

/// ||C_ab C_ba - I||_F^2 + ||C_ba C_ab - I||_F^2.
ad::Var bijectivity_loss(ad::Var phi, const BijectivitySplit& split);

struct NieLossWeights {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 0.5;
};

struct NieLossInputs {
  PairList pairs;
  IndexList kl_sources;
  BijectivitySplit split;
};

struct NieLoss {
  ad::Var total;
  double geodesic = 0.0;
  double kl = 0.0;
  double bijectivity = 0.0;
};

/// lambda1 L_G + lambda2 L_KL + lambda3 L_B; terms with zero weight are skipped.
NieLoss nie_total_loss(ad::Var phi, const Mat& geo, const NieLossInputs& inputs,
                       const NieLossWeights& weights, double alpha_kl, bool absolute_geodesic = false);

struct NieTrainConfig {
  NieLossWeights weights;
  double alpha_kl = 10.0;
  Index epochs = 200;
  Index batch_size = 3;
  double lr_max = 0.002;
  double lr_min = 0.0002;
  Index pair_count = 1 << 16;
  Index kl_sources = 64;
  Index bijectivity_m = 0;  // 0: min(1000, n / 2)
  Index sample_points = 4995;
  bool absolute_geodesic = false;
  std::uint64_t seed = 0;

  void validate(Index embedding_dim) const;
  std::string describe() const;
};

struct NieSample {
  geom::PointCloud cloud;
  geom::GeodesicMatrix geo;
};

/// Draws the per-step loss inputs for an n-point shape.
NieLossInputs sample_loss_inputs(const geom::PointCloud& cloud, const NieTrainConfig& config,
                                 Index embedding_dim, std::uint64_t seed);

struct EpochLog {
  Index epoch = 0;
  double lr = 0.0;
  double geodesic = 0.0;
  double kl = 0.0;
  double bijectivity = 0.0;
  double total = 0.0;
  double rank_ratio = 0.0;

  std::string format() const;
};

struct NieModel {
  net::BackboneConfig backbone;
  ad::ParameterSet params;
  /// Median bounding-box diagonal of the unit-area training shapes.
  double reference_diagonal = 0.0;
  std::int64_t step = 0;
};

using EpochCallback = std::function<void(const EpochLog&, const NieModel&)>;

NieModel train_nie(const std::vector<NieSample>& dataset, const net::BackboneConfig& backbone,
                   const NieTrainConfig& config, std::vector<EpochLog>* log = nullptr,
                   const EpochCallback& on_epoch = {});

/// One training-mode evaluation of the loss and its parameter gradients.
struct NieStep {
  NieLoss loss;
  double total = 0.0;
  ad::GradMap grads;
  Mat phi;
};

NieStep nie_loss_and_grad(const NieSample& sample, const net::NeighborAssignment& assignment,
                          const ad::ParameterSet& params, const net::BackboneConfig& backbone,
                          const NieTrainConfig& config, const NieLossInputs& inputs);

/// Checkpoint metadata: "backbone" (BackboneConfig::describe) and
/// "reference_diagonal".
ad::Checkpoint to_checkpoint(const NieModel& model, const std::string& config_hash);
NieModel nie_from_checkpoint(const ad::Checkpoint& checkpoint);

/// Embedding of a cloud already in training units.
Mat embed(const NieModel& model, const geom::PointCloud& cloud);

/// Rescales a raw cloud to the model's reference diagonal, then embeds it.
Mat embed_raw(const NieModel& model, const geom::PointCloud& cloud);

}  // namespace nie::embed
