// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nie/ad/params.hpp"
#include "nie/ad/tape.hpp"
#include "nie/geom/types.hpp"

namespace nie::net {

struct BackboneConfig {
  std::vector<Index> edgeconv_dims{3, 64, 64, 512};  // chained: 3->64, 64->64, 64->512
  std::vector<Index> head_hidden{256, 128};           // 512->256->128->out_dim
  Index out_dim = 20;
  Index k = 16;
  Index n_s = 3000;
  bool modified_sampling = true;

  void validate() const;

  /// Canonical text used for hashing and checkpoint manifests.
  std::string describe() const;

  /// Inverse of describe(); throws ErrorCode::kConfig on malformed text.
  static BackboneConfig parse(const std::string& described);
};

/// Coordinate-space neighbourhoods shared by all EdgeConv layers.
struct NeighborAssignment {
  /// Positions in the cloud forming X_s.
  IndexList subsample;
  /// representative[q]: position in X_s of the nearest X_s point to q.
  IndexList representative;
  /// Row q: the K neighbours of representative[q] within X_s, as X_s positions.
  geom::NeighborIndex neighbors;
  /// Same neighbours translated to cloud indices.
  IndexMat cloud_neighbors;
};

/// X_s is FPS started from the point farthest from the bounding-box centre.
/// With modified_sampling off this is plain K-NN excluding the point itself.
NeighborAssignment modified_neighbor_assignment(const geom::PointCloud& cloud,
                                                const BackboneConfig& config);

/// Glorot-uniform weights, zero biases, unit gamma, zero beta.
ad::ParameterSet init_backbone(const BackboneConfig& config, std::uint64_t seed);

using VarMap = std::map<std::string, ad::Var>;

/// One EdgeConv layer: max_j leaky(concat(x_i, x_j - x_i) W + b), then the
/// per-feature affine gamma * . + beta. `prefix` selects the parameters.
ad::Var edgeconv_forward(ad::Var features, const IndexMat& cloud_neighbors, const VarMap& params,
                         const std::string& prefix);

ad::Var backbone_forward(ad::Tape& tape, const geom::PointCloud& cloud,
                         const NeighborAssignment& assignment, const VarMap& params,
                         const BackboneConfig& config);

/// Inference without a persistent tape.
Mat backbone_apply(const geom::PointCloud& cloud, const ad::ParameterSet& params,
                   const BackboneConfig& config);

}  // namespace nie::net
