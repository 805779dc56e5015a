// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/eval/ablation.hpp"

#include <spdlog/fmt/fmt.h>

#include "nie/common/error.hpp"
#include "nie/common/parallel.hpp"
#include "nie/eval/metrics.hpp"

namespace nie::eval {

std::vector<AblationCell> default_ablation_grid(const embed::NieLossWeights& full) {
  require(full.lambda1 > 0.0 && full.lambda2 > 0.0 && full.lambda3 > 0.0, ErrorCode::kConfig,
          "ablation: the full model needs all three loss weights positive");
  return {
      {"L_G", {full.lambda1, 0.0, 0.0}, false},
      {"L_G+L_B", {full.lambda1, 0.0, full.lambda3}, false},
      {"L_G+L_B+L_KL", {full.lambda1, full.lambda2, full.lambda3}, false},
      {"full", full, true},
  };
}

ModelScores score_embedding(const embed::NieModel& model, const AblationData& data) {
  require(!data.test.empty(), ErrorCode::kData, "score_embedding: no test shapes");
  std::vector<Mat> phi(data.test.size());
  for (std::size_t i = 0; i < data.test.size(); ++i) phi[i] = embed::embed(model, data.test[i].cloud);
  ModelScores s;
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    s.rel_error += relative_embedding_error(phi[i], data.test[i].geo);
    s.rank_ratio += rank_ratio(phi[i]);
  }
  s.rel_error /= static_cast<double>(data.test.size());
  s.rank_ratio /= static_cast<double>(data.test.size());
  for (const EvalPair& p : data.pairs) {
    const auto x = static_cast<std::size_t>(p.x), y = static_cast<std::size_t>(p.y);
    s.opt += opt_metric(phi[x], phi[y], p.gt, data.test[x].geo);
  }
  if (!data.pairs.empty()) s.opt /= static_cast<double>(data.pairs.size());
  return s;
}

double score_matching(const embed::NieModel& nie, const match::NimModel& nim,
                      const AblationData& data, double alpha) {
  require(!data.pairs.empty(), ErrorCode::kData, "score_matching: no test pairs");
  double total = 0.0;
  for (const EvalPair& p : data.pairs) {
    const auto& x = data.test[static_cast<std::size_t>(p.x)];
    const auto& y = data.test[static_cast<std::size_t>(p.y)];
    const match::InferredMap m = match::infer_map(x.cloud, y.cloud, nie, nim, alpha);
    total += mean_geodesic_error(m.y_to_x, p.gt, x.geo);
  }
  return total / static_cast<double>(data.pairs.size());
}

std::vector<AblationResult> run_ablation(const std::vector<AblationCell>& grid,
                                         const AblationData& data, const AblationConfig& config,
                                         const CellCallback& on_cell) {
  require(!grid.empty(), ErrorCode::kConfig, "ablation: empty grid");
  for (const EvalPair& p : data.pairs) {
    require(p.x >= 0 && p.y >= 0 && static_cast<std::size_t>(std::max(p.x, p.y)) < data.test.size(),
            ErrorCode::kData, "ablation: pair index out of range");
  }
  std::vector<AblationResult> results(grid.size());
  auto run_cell = [&](std::size_t i) {
    const AblationCell& cell = grid[i];
    net::BackboneConfig backbone = config.backbone;
    backbone.modified_sampling = cell.modified_sampling;
    embed::NieTrainConfig nie_config = config.nie;
    nie_config.weights = cell.weights;
    embed::NieModel nie = embed::train_nie(data.train, backbone, nie_config);
    const ModelScores s = score_embedding(nie, data);
    AblationResult r{cell.name, s.opt, s.rel_error, s.rank_ratio, -1.0};
    if (config.train_nim) {
      std::vector<match::NimSample> nim_data;
      for (const auto& t : data.train) nim_data.push_back({t.cloud, t.geo});
      net::BackboneConfig descriptor = config.descriptor;
      descriptor.modified_sampling = cell.modified_sampling;
      const match::NimModel nim = match::train_nim(nim_data, nie, descriptor, config.nim);
      r.match_error = score_matching(nie, nim, data, config.nim.alpha);
    }
    results[i] = r;
  };
  if (config.parallel) {
    parallel_for(grid.size(), run_cell);
    if (on_cell) {
      for (const auto& r : results) on_cell(r);
    }
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      run_cell(i);
      if (on_cell) on_cell(results[i]);
    }
  }
  return results;
}

Table ablation_table(const std::vector<AblationResult>& results) {
  Table t{{"loss", "OPT", "rel.err", "rank", "match.err"}, {}};
  for (const auto& r : results) {
    t.add_row({r.name, percent(r.opt), percent(r.rel_error), fmt::format("{:.4f}", r.rank_ratio),
               r.match_error < 0.0 ? std::string("-") : percent(r.match_error)});
  }
  return t;
}

}  // namespace nie::eval
