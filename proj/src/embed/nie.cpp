// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/embed/nie.hpp"

#include <spdlog/fmt/fmt.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "nie/ad/ops.hpp"
#include "nie/common/error.hpp"
#include "nie/common/parallel.hpp"
#include "nie/common/random.hpp"
#include "nie/fmap/fmap.hpp"
#include "nie/geom/geometry.hpp"

namespace nie::embed {

using ad::Matrix;
using ad::Tape;
using ad::Var;

namespace {

struct PairTerms {
  Var d_e;
  Matrix d_s;  // column of target distances
};

PairTerms pair_distances(Var phi, const Mat& geo, const PairList& pairs, double floor,
                         const char* what) {
  IndexList p, q;
  std::vector<double> d;
  for (const auto& [i, j] : pairs) {
    const double s = geo(i, j);
    if (!(s > floor) || !std::isfinite(s)) continue;
    p.push_back(i);
    q.push_back(j);
    d.push_back(s);
  }
  require(!p.empty(), ErrorCode::kSize, std::string(what) + ": empty pair set");
  PairTerms out;
  out.d_e = ad::row_norm(ad::sub(ad::gather_rows(phi, p), ad::gather_rows(phi, q)));
  out.d_s = Eigen::Map<const Matrix>(d.data(), static_cast<Index>(d.size()), 1);
  return out;
}

}  // namespace

Var relative_geodesic_loss(Var phi, const Mat& geo, const PairList& pairs, double floor) {
  const PairTerms t = pair_distances(phi, geo, pairs, floor, "relative_geodesic_loss");
  Tape& tape = phi.tape();
  const Var residual = ad::mul(ad::sub(t.d_e, tape.constant(t.d_s)),
                               tape.constant(t.d_s.cwiseInverse()));
  return ad::scale(ad::squared_norm(residual), 1.0 / static_cast<double>(t.d_s.rows()));
}

Var absolute_geodesic_loss(Var phi, const Mat& geo, const PairList& pairs, double floor) {
  const PairTerms t = pair_distances(phi, geo, pairs, floor, "absolute_geodesic_loss");
  const Var residual = ad::sub(t.d_e, phi.tape().constant(t.d_s));
  return ad::scale(ad::squared_norm(residual), 1.0 / static_cast<double>(t.d_s.rows()));
}

Var kl_loss(Var phi, const Mat& geo, const IndexList& sources, double alpha_kl) {
  const Index n = phi.rows();
  require(!sources.empty(), ErrorCode::kSize, "kl_loss: no sources");
  require(n >= 2, ErrorCode::kSize, "kl_loss: need at least two points");
  require(geo.rows() == n && geo.cols() == n, ErrorCode::kShape, "kl_loss: geodesic size mismatch");
  const auto s = static_cast<Index>(sources.size());
  Matrix mask = Matrix::Ones(s, n);
  Matrix log_ps = Matrix::Zero(s, n);
  for (Index r = 0; r < s; ++r) {
    const Index p = sources[static_cast<std::size_t>(r)];
    mask(r, p) = 0.0;
    double top = -std::numeric_limits<double>::infinity();
    for (Index q = 0; q < n; ++q) {
      if (q != p) top = std::max(top, -alpha_kl * geo(p, q));
    }
    double z = 0.0;
    for (Index q = 0; q < n; ++q) {
      if (q != p) z += std::exp(-alpha_kl * geo(p, q) - top);
    }
    require(std::isfinite(top) && z > 0.0, ErrorCode::kNumeric, "kl_loss: degenerate distribution");
    const double log_z = top + std::log(z);
    for (Index q = 0; q < n; ++q) {
      if (q != p) log_ps(r, q) = -alpha_kl * geo(p, q) - log_z;
    }
  }
  Tape& tape = phi.tape();
  const Var d_e = ad::distance_matrix(ad::gather_rows(phi, sources), phi);
  const Var log_pe = ad::log_softmax_rows(ad::scale(d_e, -alpha_kl), mask);
  const Var pe = ad::mul(ad::exp(log_pe), tape.constant(mask));
  const Var kl = ad::sum(ad::mul(pe, ad::sub(log_pe, tape.constant(log_ps))));
  return ad::scale(kl, 1.0 / static_cast<double>(s));
}

BijectivitySplit make_bijectivity_split(const Mat& positions, Index m, std::uint64_t seed) {
  const Index n = positions.rows();
  require(m >= 1, ErrorCode::kSize, "bijectivity split: m must be positive");
  require(2 * m <= n, ErrorCode::kSize, "bijectivity split: 2m exceeds the point count");
  Rng rng(seed);
  const IndexList order = geom::farthest_point_sampling(positions, 2 * m, uniform_index(rng, n));
  BijectivitySplit split;
  split.a.assign(order.begin(), order.begin() + m);
  split.b.assign(order.begin() + m, order.end());
  const Mat xa = take_rows(positions, split.a);
  const Mat xb = take_rows(positions, split.b);
  split.t_ba = geom::nearest_neighbor(xb, xa);
  split.t_ab = geom::nearest_neighbor(xa, xb);
  return split;
}

Var bijectivity_loss(Var phi, const BijectivitySplit& split) {
  const Var phi_a = ad::gather_rows(phi, split.a);
  const Var phi_b = ad::gather_rows(phi, split.b);
  // C_ab = pinv(Phi_b) Phi_a[T_ba], C_ba = pinv(Phi_a) Phi_b[T_ab].
  const Var c_ab = fmap::encode_map(split.t_ba, phi_a, phi_b);
  const Var c_ba = fmap::encode_map(split.t_ab, phi_b, phi_a);
  const Var eye = ad::identity(phi.tape(), phi.cols());
  return ad::add(ad::squared_norm(ad::sub(ad::matmul(c_ab, c_ba), eye)),
                 ad::squared_norm(ad::sub(ad::matmul(c_ba, c_ab), eye)));
}

NieLoss nie_total_loss(Var phi, const Mat& geo, const NieLossInputs& inputs,
                       const NieLossWeights& w, double alpha_kl, bool absolute_geodesic) {
  Tape& tape = phi.tape();
  NieLoss out;
  out.total = tape.constant(Matrix::Zero(1, 1));
  if (w.lambda1 > 0.0) {
    const Var lg = absolute_geodesic ? absolute_geodesic_loss(phi, geo, inputs.pairs)
                                     : relative_geodesic_loss(phi, geo, inputs.pairs);
    out.geodesic = lg.scalar();
    out.total = ad::add(out.total, ad::scale(lg, w.lambda1));
  }
  if (w.lambda2 > 0.0) {
    const Var lkl = kl_loss(phi, geo, inputs.kl_sources, alpha_kl);
    out.kl = lkl.scalar();
    out.total = ad::add(out.total, ad::scale(lkl, w.lambda2));
  }
  if (w.lambda3 > 0.0) {
    const Var lb = bijectivity_loss(phi, inputs.split);
    out.bijectivity = lb.scalar();
    out.total = ad::add(out.total, ad::scale(lb, w.lambda3));
  }
  return out;
}

void NieTrainConfig::validate(Index embedding_dim) const {
  require(weights.lambda1 >= 0.0 && weights.lambda2 >= 0.0 && weights.lambda3 >= 0.0,
          ErrorCode::kConfig, "nie: loss weights must be non-negative");
  require(epochs >= 1 && batch_size >= 1, ErrorCode::kConfig, "nie: epochs and batch_size must be >= 1");
  require(lr_max >= lr_min && lr_min >= 0.0, ErrorCode::kConfig, "nie: need lr_max >= lr_min >= 0");
  require(pair_count >= 1 && kl_sources >= 1, ErrorCode::kConfig, "nie: sample counts must be >= 1");
  require(alpha_kl > 0.0, ErrorCode::kConfig, "nie: alpha_kl must be positive");
  require(sample_points >= 4, ErrorCode::kConfig, "nie: sample_points must be >= 4");
  require(bijectivity_m == 0 || bijectivity_m >= embedding_dim, ErrorCode::kConfig,
          "nie: bijectivity m must be at least the embedding dimension");
}

std::string NieTrainConfig::describe() const {
  std::ostringstream out;
  out << "lambda=" << weights.lambda1 << "," << weights.lambda2 << "," << weights.lambda3
      << ";alpha_kl=" << alpha_kl << ";epochs=" << epochs << ";batch_size=" << batch_size
      << ";lr=" << lr_max << "," << lr_min << ";pairs=" << pair_count << ";kl_sources=" << kl_sources
      << ";m=" << bijectivity_m << ";sample_points=" << sample_points
      << ";absolute=" << (absolute_geodesic ? 1 : 0) << ";seed=" << seed;
  return out.str();
}

NieLossInputs sample_loss_inputs(const geom::PointCloud& cloud, const NieTrainConfig& config,
                                 Index embedding_dim, std::uint64_t seed) {
  const Index n = cloud.size();
  NieLossInputs in;
  Rng rng(seed);
  const Index all_pairs = n * (n - 1) / 2;
  if (all_pairs <= config.pair_count) {
    in.pairs.reserve(static_cast<std::size_t>(all_pairs));
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) in.pairs.emplace_back(i, j);
    }
  } else {
    in.pairs.reserve(static_cast<std::size_t>(config.pair_count));
    while (static_cast<Index>(in.pairs.size()) < config.pair_count) {
      const Index i = uniform_index(rng, n), j = uniform_index(rng, n);
      if (i != j) in.pairs.emplace_back(i, j);
    }
  }
  in.kl_sources = sample_without_replacement(n, std::min(config.kl_sources, n), rng);
  if (config.weights.lambda3 > 0.0) {
    const Index m = config.bijectivity_m > 0 ? config.bijectivity_m : std::min<Index>(1000, n / 2);
    require(m >= embedding_dim, ErrorCode::kSize, "nie: too few points for the bijectivity split");
    in.split = make_bijectivity_split(cloud.positions, m, derive_seed(seed, 7));
  }
  return in;
}

std::string EpochLog::format() const {
  return fmt::format("epoch={} lr={:.6g} L_G={:.6g} L_KL={:.6g} L_B={:.6g} total={:.6g} rank={:.6g}",
                     epoch, lr, geodesic, kl, bijectivity, total, rank_ratio);
}

NieStep nie_loss_and_grad(const NieSample& sample, const net::NeighborAssignment& assignment,
                          const ad::ParameterSet& params, const net::BackboneConfig& backbone,
                          const NieTrainConfig& config, const NieLossInputs& inputs) {
  ad::Tape tape;
  const net::VarMap vars = params.bind(tape, true);
  const Var phi = net::backbone_forward(tape, sample.cloud, assignment, vars, backbone);
  NieStep out;
  out.loss = nie_total_loss(phi, sample.geo.finite_for_loss(), inputs, config.weights,
                            config.alpha_kl, config.absolute_geodesic);
  out.total = out.loss.total.scalar();
  tape.backward(out.loss.total);
  out.grads = tape.named_grads();
  out.phi = phi.value();
  return out;
}

NieModel train_nie(const std::vector<NieSample>& dataset, const net::BackboneConfig& backbone,
                   const NieTrainConfig& config, std::vector<EpochLog>* log,
                   const EpochCallback& on_epoch) {
  require(!dataset.empty(), ErrorCode::kData, "train_nie: empty dataset");
  backbone.validate();
  config.validate(backbone.out_dim);
  for (const auto& s : dataset) {
    s.cloud.validate();
    require(s.geo.size() == s.cloud.size(), ErrorCode::kShape, "train_nie: geodesic size mismatch");
  }
  NieModel model;
  model.backbone = backbone;
  model.params = net::init_backbone(backbone, derive_seed(config.seed, 1));
  std::vector<geom::PointCloud> clouds;
  for (const auto& s : dataset) clouds.push_back(s.cloud);
  model.reference_diagonal = geom::median_normalized_diagonal(clouds);

  const auto count = static_cast<Index>(dataset.size());
  std::vector<net::NeighborAssignment> cached(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].cloud.size() <= config.sample_points) {
      cached[i] = net::modified_neighbor_assignment(dataset[i].cloud, backbone);
    }
  }

  ad::AdamState adam;
  Rng order_rng(derive_seed(config.seed, 2));
  const Index steps_per_epoch = (count + config.batch_size - 1) / config.batch_size;
  const Index total_steps = config.epochs * steps_per_epoch;
  IndexList order = iota_indices(count);
  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_indices(order, order_rng);
    EpochLog entry;
    entry.epoch = epoch + 1;
    Index seen = 0;
    for (Index b = 0; b < steps_per_epoch; ++b) {
      const double lr = ad::cosine_lr(model.step, total_steps, config.lr_max, config.lr_min);
      entry.lr = lr;
      const Index first = b * config.batch_size;
      const Index last = std::min(count, first + config.batch_size);
      std::vector<NieStep> results(static_cast<std::size_t>(last - first));
      const std::uint64_t step_seed = derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(model.step));
      try {
        parallel_for(results.size(), [&](std::size_t i) {
          const auto shape = static_cast<std::size_t>(order[static_cast<std::size_t>(first) + i]);
          const std::uint64_t item_seed = derive_seed(step_seed, i);
          const NieSample& full = dataset[shape];
          if (full.cloud.size() <= config.sample_points) {
            const NieLossInputs in = sample_loss_inputs(full.cloud, config, backbone.out_dim, item_seed);
            results[i] = nie_loss_and_grad(full, cached[shape], model.params, backbone, config, in);
            return;
          }
          Rng rng(derive_seed(item_seed, 3));
          IndexList keep = sample_without_replacement(full.cloud.size(), config.sample_points, rng);
          std::sort(keep.begin(), keep.end());
          NieSample sub;
          sub.cloud = full.cloud;
          sub.cloud.positions = take_rows(full.cloud.positions, keep);
          sub.geo = full.geo.restrict_to(keep);
          const net::NeighborAssignment assignment = net::modified_neighbor_assignment(sub.cloud, backbone);
          const NieLossInputs in = sample_loss_inputs(sub.cloud, config, backbone.out_dim, item_seed);
          results[i] = nie_loss_and_grad(sub, assignment, model.params, backbone, config, in);
        });
      } catch (const Error& e) {
        fail(e.code(), fmt::format("train_nie: aborted at epoch {} step {}: {}", epoch + 1, model.step, e.what()));
      }
      ad::GradMap grads;
      const double weight = 1.0 / static_cast<double>(results.size());
      for (const auto& r : results) {
        ad::accumulate_grads(grads, r.grads, weight);
        entry.geodesic += r.loss.geodesic;
        entry.kl += r.loss.kl;
        entry.bijectivity += r.loss.bijectivity;
        entry.total += r.total;
        entry.rank_ratio += rank_ratio(r.phi);
        ++seen;
      }
      ad::adam_step(model.params, grads, adam, lr);
      ++model.step;
    }
    const double inv = 1.0 / static_cast<double>(seen);
    entry.geodesic *= inv;
    entry.kl *= inv;
    entry.bijectivity *= inv;
    entry.total *= inv;
    entry.rank_ratio *= inv;
    if (log) log->push_back(entry);
    if (on_epoch) on_epoch(entry, model);
  }
  return model;
}

ad::Checkpoint to_checkpoint(const NieModel& model, const std::string& config_hash) {
  ad::Checkpoint c;
  c.params = model.params;
  c.step = model.step;
  c.config_hash = config_hash;
  c.metadata["backbone"] = model.backbone.describe();
  c.metadata["reference_diagonal"] = fmt::format("{:.17g}", model.reference_diagonal);
  return c;
}

NieModel nie_from_checkpoint(const ad::Checkpoint& checkpoint) {
  for (const char* key : {"backbone", "reference_diagonal"}) {
    require(checkpoint.metadata.count(key) == 1, ErrorCode::kData,
            std::string("NIE checkpoint: missing metadata ") + key);
  }
  NieModel m;
  m.backbone = net::BackboneConfig::parse(checkpoint.metadata.at("backbone"));
  m.params = checkpoint.params;
  m.step = checkpoint.step;
  const std::string& d = checkpoint.metadata.at("reference_diagonal");
  const auto [end, ec] = std::from_chars(d.data(), d.data() + d.size(), m.reference_diagonal);
  require(ec == std::errc() && end == d.data() + d.size() && m.reference_diagonal > 0.0,
          ErrorCode::kData, "NIE checkpoint: bad reference_diagonal");
  return m;
}

Mat embed(const NieModel& model, const geom::PointCloud& cloud) {
  return net::backbone_apply(cloud, model.params, model.backbone);
}

Mat embed_raw(const NieModel& model, const geom::PointCloud& cloud) {
  require(model.reference_diagonal > 0.0, ErrorCode::kData, "embed_raw: model has no reference scale");
  return embed(model, geom::normalize_to_diagonal(cloud, model.reference_diagonal));
}

}  // namespace nie::embed
