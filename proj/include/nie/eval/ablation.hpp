// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nie/embed/nie.hpp"
#include "nie/eval/report.hpp"
#include "nie/match/nim.hpp"

namespace nie::eval {

struct AblationCell {
  std::string name;
  embed::NieLossWeights weights;
  bool modified_sampling = true;
};

/// L_G; L_G + L_B; L_G + L_B + L_KL; full loss with modified sampling. The
/// first three use plain kNN graphs. Nonzero weights come from `full`.
std::vector<AblationCell> default_ablation_grid(const embed::NieLossWeights& full = {});

/// Held-out pair with the ground-truth map gt: Y -> X.
struct EvalPair {
  Index x = 0;
  Index y = 0;
  fmap::PointMap gt;
};

struct AblationData {
  std::vector<embed::NieSample> train;
  std::vector<embed::NieSample> test;
  std::vector<EvalPair> pairs;
};

struct AblationConfig {
  net::BackboneConfig backbone;
  embed::NieTrainConfig nie;
  /// Descriptor network; a NIM is retrained per cell when nim_epochs > 0.
  net::BackboneConfig descriptor;
  match::NimTrainConfig nim;
  bool train_nim = true;
  bool parallel = false;
};

struct AblationResult {
  std::string name;
  double opt = 0.0;           // mean over pairs, x1 scale
  double rel_error = 0.0;     // mean over test shapes, x1 scale
  double rank_ratio = 0.0;    // mean sigma_k / sigma_1 over test shapes
  double match_error = -1.0;  // negative when no NIM was trained
};

struct ModelScores {
  double opt = 0.0;
  double rel_error = 0.0;
  double rank_ratio = 0.0;
};

/// OPT, relative error and rank ratio of a trained NIE on held-out data.
ModelScores score_embedding(const embed::NieModel& model, const AblationData& data);

/// Mean geodesic error on X of the inferred Y -> X maps over the pairs.
double score_matching(const embed::NieModel& nie, const match::NimModel& nim,
                      const AblationData& data, double alpha);

using CellCallback = std::function<void(const AblationResult&)>;

std::vector<AblationResult> run_ablation(const std::vector<AblationCell>& grid,
                                         const AblationData& data, const AblationConfig& config,
                                         const CellCallback& on_cell = {});

/// x100 report table: cell, OPT, rel. error, rank ratio, match error.
Table ablation_table(const std::vector<AblationResult>& results);

}  // namespace nie::eval
