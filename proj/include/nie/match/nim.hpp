// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nie/ad/params.hpp"
#include "nie/ad/tape.hpp"
#include "nie/embed/nie.hpp"
#include "nie/fmap/fmap.hpp"
#include "nie/geom/types.hpp"
#include "nie/net/backbone.hpp"

namespace nie::match {

// p: |Y| x |X| soft map from Y to X; p_tilde: |X| x |Y| soft map from X to Y.

/// (1/|X|^2) ||D_X - (p~ p) D_X (p~ p)^T||^2 + (1/|Y|^2) ||D_Y - (p p~) D_Y (p p~)^T||^2.
ad::Var cyclic_loss(ad::Var p, ad::Var p_tilde, const Mat& geo_x, const Mat& geo_y);

/// (1/|X|^2) ||D_X - p~ D_Y p~^T||^2 + (1/|Y|^2) ||D_Y - p D_X p^T||^2.
ad::Var isometric_loss(ad::Var p, ad::Var p_tilde, const Mat& geo_x, const Mat& geo_y);

struct DescLoss {
  ad::Var total;
  double cyclic = 0.0;
  double isometric = 0.0;
};

DescLoss desc_loss(ad::Var p, ad::Var p_tilde, const Mat& geo_x, const Mat& geo_y);

/// Descriptor loss of one pair from embeddings and descriptors restricted to
/// the loss points.
DescLoss pair_loss(ad::Var phi_x, ad::Var phi_y, ad::Var g_x, ad::Var g_y, const Mat& geo_x,
                   const Mat& geo_y, double alpha);

struct NimTrainConfig {
  Index epochs = 100;
  Index batch_size = 4;
  double lr_max = 0.002;
  double lr_min = 0.001;
  double alpha = 30.0;
  Index loss_points = 512;
  bool fine_tune_nie = false;
  std::uint64_t seed = 0;

  void validate() const;
  std::string describe() const;
};

struct NimSample {
  geom::PointCloud cloud;
  geom::GeodesicMatrix geo;  // ground truth or approx_geodesics
};

struct NimEpochLog {
  Index epoch = 0;
  double lr = 0.0;
  double cyclic = 0.0;
  double isometric = 0.0;
  double total = 0.0;

  std::string format() const;
};

struct NimModel {
  net::BackboneConfig backbone;
  ad::ParameterSet params;
  std::int64_t step = 0;
};

/// Metadata "backbone" holds the descriptor network description.
ad::Checkpoint to_checkpoint(const NimModel& model, const std::string& config_hash);
NimModel nim_from_checkpoint(const ad::Checkpoint& checkpoint);

/// Trains descriptors against a frozen NIE. With fine_tune_nie the NIE
/// parameters in `nie` are updated as well.
NimModel train_nim(const std::vector<NimSample>& dataset, embed::NieModel& nie,
                   const net::BackboneConfig& backbone, const NimTrainConfig& config,
                   std::vector<NimEpochLog>* log = nullptr,
                   const std::function<void(const NimEpochLog&)>& on_epoch = {});

/// Geodesics approximated by embedding distances.
geom::GeodesicMatrix approx_geodesics(const geom::PointCloud& cloud, const embed::NieModel& nie);

struct InferredMap {
  fmap::PointMap x_to_y;  // for each X point, a Y index
  fmap::PointMap y_to_x;  // for each Y point, an X index
  fmap::FunctionalMap c;
  fmap::FunctionalMap c_tilde;
  double entropy_xy = 0.0;  // mean row entropy of the soft map X -> Y
  double entropy_yx = 0.0;
  std::vector<std::string> warnings;
};

InferredMap infer_map(const geom::PointCloud& cloud_x, const geom::PointCloud& cloud_y,
                      const embed::NieModel& nie, const NimModel& nim, double alpha = 30.0);

/// Same pipeline from precomputed embeddings and descriptors.
InferredMap infer_map_from_features(const Mat& phi_x, const Mat& phi_y, const Mat& g_x,
                                    const Mat& g_y, double alpha = 30.0);

Mat describe(const NimModel& nim, const geom::PointCloud& cloud);

}  // namespace nie::match
