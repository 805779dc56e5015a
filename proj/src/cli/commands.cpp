// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/commands.hpp"

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>

#include "cli/dataset.hpp"
#include "nie/ad/gradcheck.hpp"
#include "nie/common/error.hpp"
#include "nie/eval/ablation.hpp"
#include "nie/eval/gradchecks.hpp"
#include "nie/eval/metrics.hpp"
#include "nie/eval/report.hpp"
#include "nie/geom/corrupt.hpp"
#include "nie/geom/geometry.hpp"
#include "nie/geom/shapes.hpp"
#include "nie/io/io.hpp"

namespace nie::cli {

namespace {

std::ofstream open_text(const fs::path& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot write " + path.string());
  return f;
}

std::vector<embed::NieSample> nie_samples(const std::vector<StoredShape>& shapes) {
  std::vector<embed::NieSample> out;
  for (const auto& s : shapes) out.push_back({s.cloud, s.geo});
  return out;
}

/// Consecutive test shapes with matching vertex counts, identity ground truth.
std::vector<eval::EvalPair> consecutive_pairs(const std::vector<StoredShape>& shapes) {
  std::vector<eval::EvalPair> out;
  for (std::size_t i = 0; i + 1 < shapes.size(); ++i) {
    require(shapes[i].cloud.size() == shapes[i + 1].cloud.size(), ErrorCode::kData,
            "eval: test shapes must share vertex order for identity ground truth");
    out.push_back({static_cast<Index>(i), static_cast<Index>(i + 1), iota_indices(shapes[i].cloud.size())});
  }
  require(!out.empty(), ErrorCode::kData, "eval: need at least two test shapes");
  return out;
}

embed::NieModel load_nie(const fs::path& base, const Config& config) {
  const embed::NieModel m = embed::nie_from_checkpoint(ad::load_checkpoint(base));
  const std::string runtime = backbone_config(config, "backbone").describe();
  require(m.backbone.describe() == runtime, ErrorCode::kConfig,
          "NIE checkpoint backbone '" + m.backbone.describe() + "' disagrees with runtime config '" + runtime + "'");
  return m;
}

match::NimModel load_nim(const fs::path& base, const Config& config) {
  const match::NimModel m = match::nim_from_checkpoint(ad::load_checkpoint(base));
  const std::string runtime = backbone_config(config, "descriptor").describe();
  require(m.backbone.describe() == runtime, ErrorCode::kConfig,
          "NIM checkpoint backbone '" + m.backbone.describe() + "' disagrees with runtime config '" + runtime + "'");
  return m;
}

std::vector<geom::Shape> generate(const Config& c, Index count, std::uint64_t seed) {
  const std::string family = c.get_string("data.family");
  if (family == "strip") {
    const geom::StripParams sp{c.get_index("data.nu"), c.get_index("data.nv"), c.get_double("data.aspect")};
    return geom::make_strip_family(count, c.get_double("data.bend_min"), c.get_double("data.bend_max"), sp, seed);
  }
  if (family == "arm") {
    geom::ArmParams ap;
    ap.links = c.get_index("data.links");
    return geom::make_articulated_family(count, c.get_double("data.angle_min"), c.get_double("data.angle_max"), ap, seed);
  }
  fail(ErrorCode::kConfig, "config: data.family must be strip or arm, got '" + family + "'");
}

geom::CorruptedCloud corrupt_target(const Config& c, const StoredShape& y) {
  const std::string mode = c.get_string("eval.corrupt");
  const std::uint64_t seed = c.get_seed("eval.seed");
  if (mode == "none") return {y.cloud, iota_indices(y.cloud.size())};
  if (mode == "hole") return geom::corrupt_hole(y.cloud, c.get_index("eval.hole_centers"), c.get_index("eval.hole_points"), seed);
  if (mode == "cut") return geom::corrupt_cut(y.cloud, y.geo, c.get_double("eval.cut_fraction"), seed);
  if (mode == "half") return geom::corrupt_half(y.cloud, Eigen::Vector3d(1.0, 0.3, 0.2));
  fail(ErrorCode::kConfig, "config: eval.corrupt must be none, hole, cut or half, got '" + mode + "'");
}

}  // namespace

void RunContext::prepare() const {
  fs::create_directories(out);
  config.save(out / (command + ".config.ini"));
}

int run_gen_data(const RunContext& ctx) {
  const Config& c = ctx.config;
  const auto train = generate(c, c.get_index("data.train_count"), c.get_seed("data.train_seed"));
  const auto test = generate(c, c.get_index("data.test_count"), c.get_seed("data.test_seed"));
  ctx.prepare();
  write_split(ctx.out / "train", train);
  write_split(ctx.out / "test", test);
  spdlog::info("gen-data: {} train and {} test shapes in {}", train.size(), test.size(), ctx.out.string());
  return 0;
}

int run_geodesics(const RunContext& ctx, const fs::path& data) {
  const Config& c = ctx.config;
  const std::string method = c.get_string("geodesics.method");
  require(method == "analytic" || method == "dijkstra" || method == "knn", ErrorCode::kConfig,
          "config: geodesics.method must be analytic, dijkstra or knn");
  ctx.prepare();
  for (const char* split : {"train", "test"}) {
    const fs::path dir = data / split;
    if (!fs::exists(dir / "shapes.txt")) continue;
    for (const auto& s : read_split(dir, false)) {
      geom::GeodesicMatrix g;
      if (method == "analytic") {
        const fs::path gt = dir / (s.name + ".gt.geod");
        require(fs::exists(gt), ErrorCode::kData, "no generator geodesics for " + s.name);
        g = io::read_geodesics(gt);
      } else if (method == "dijkstra") {
        g = geom::geodesics_dijkstra(s.mesh);
      } else {
        g = geom::knn_graph_geodesics(s.cloud.positions, c.get_index("geodesics.knn_k"));
      }
      if (!g.all_finite()) spdlog::warn("geodesics: {} has unreachable pairs", s.name);
      io::write_geodesics(dir / (s.name + ".geod"), g);
    }
    spdlog::info("geodesics: {} split done ({})", split, method);
  }
  return 0;
}

int run_train_nie(const RunContext& ctx, const fs::path& data) {
  const Config& c = ctx.config;
  const net::BackboneConfig bb = backbone_config(c, "backbone");
  const embed::NieTrainConfig tc = nie_config(c);
  tc.validate(bb.out_dim);
  const auto shapes = read_split(data / "train", true);
  ctx.prepare();
  std::ofstream log = open_text(ctx.out / "train_nie.log");
  const embed::NieModel model = embed::train_nie(nie_samples(shapes), bb, tc, nullptr,
                                                 [&](const embed::EpochLog& e, const embed::NieModel&) {
                                                   log << e.format() << "\n" << std::flush;
                                                   spdlog::info("train-nie {}", e.format());
                                                 });
  ad::save_checkpoint(ctx.out / "nie", embed::to_checkpoint(model, c.hash()));
  return 0;
}

int run_train_nim(const RunContext& ctx, const TrainNimArgs& args) {
  const Config& c = ctx.config;
  embed::NieModel nie = load_nie(args.nie, c);
  const net::BackboneConfig desc = backbone_config(c, "descriptor");
  const match::NimTrainConfig tc = nim_config(c);
  const std::string geodesics = c.get_string("nim.geodesics");
  require(geodesics == "truth" || geodesics == "approx", ErrorCode::kConfig,
          "config: nim.geodesics must be truth or approx");
  const auto shapes = read_split(args.data / "train", geodesics == "truth");
  std::vector<match::NimSample> samples;
  for (const auto& s : shapes) {
    samples.push_back({s.cloud, geodesics == "truth" ? s.geo : match::approx_geodesics(s.cloud, nie)});
  }
  ctx.prepare();
  std::ofstream log = open_text(ctx.out / "train_nim.log");
  const match::NimModel model = match::train_nim(samples, nie, desc, tc, nullptr, [&](const match::NimEpochLog& e) {
    log << e.format() << "\n" << std::flush;
    spdlog::info("train-nim {}", e.format());
  });
  ad::save_checkpoint(ctx.out / "nim", match::to_checkpoint(model, c.hash()));
  if (tc.fine_tune_nie) ad::save_checkpoint(ctx.out / "nie_tuned", embed::to_checkpoint(nie, c.hash()));
  return 0;
}

int run_embed(const RunContext& ctx, const EmbedArgs& args) {
  const embed::NieModel nie = load_nie(args.nie, ctx.config);
  const geom::PointCloud cloud = io::read_cloud(args.input);
  const Mat phi = args.raw_units ? embed::embed_raw(nie, cloud) : embed::embed(nie, cloud);
  ctx.prepare();
  io::write_matrix_f32(ctx.out / (args.input.stem().string() + ".emb"), "EMBD", phi);
  spdlog::info("embed: {} points, rank ratio {:.4g}", phi.rows(), rank_ratio(phi));
  return 0;
}

int run_match(const RunContext& ctx, const MatchArgs& args) {
  const Config& c = ctx.config;
  const embed::NieModel nie = load_nie(args.nie, c);
  const match::NimModel nim = load_nim(args.nim, c);
  const geom::PointCloud x = io::read_cloud(args.x);
  const geom::PointCloud y = io::read_cloud(args.y);
  const match::InferredMap m = match::infer_map(x, y, nie, nim, c.get_double("nim.alpha"));
  ctx.prepare();
  io::write_indices(ctx.out / "x_to_y.txt", m.x_to_y);
  io::write_indices(ctx.out / "y_to_x.txt", m.y_to_x);
  io::write_matrix_f32(ctx.out / "c.fmap", "FMAP", m.c);
  io::write_matrix_f32(ctx.out / "c_tilde.fmap", "FMAP", m.c_tilde);
  std::ofstream stats = open_text(ctx.out / "match_stats.txt");
  stats << fmt::format("entropy_xy {:.6g}\nentropy_yx {:.6g}\n", m.entropy_xy, m.entropy_yx);
  for (const auto& w : m.warnings) {
    stats << "warning " << w << "\n";
    spdlog::warn("match: {}", w);
  }
  return 0;
}

int run_eval(const RunContext& ctx, const EvalArgs& args) {
  const Config& c = ctx.config;
  const embed::NieModel nie = load_nie(args.nie, c);
  const auto test = read_split(args.data / "test", true);
  const auto pairs = consecutive_pairs(test);

  std::vector<Mat> phi, eucl, mds;
  for (const auto& s : test) {
    phi.push_back(embed::embed(nie, s.cloud));
    eucl.push_back(eval::euclidean_baseline(s.cloud));
    mds.push_back(eval::mds_classical(s.geo, nie.backbone.out_dim).embedding);
  }
  auto row = [&](const std::string& name, const std::vector<Mat>& e, bool has_opt) {
    double rel = 0.0, opt = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) rel += eval::relative_embedding_error(e[i], test[i].geo);
    for (const auto& p : pairs) {
      const auto x = static_cast<std::size_t>(p.x), y = static_cast<std::size_t>(p.y);
      opt += eval::opt_metric(e[x], e[y], p.gt, test[x].geo);
    }
    return std::vector<std::string>{name, has_opt ? eval::percent(opt / static_cast<double>(pairs.size())) : "-",
                                    eval::percent(rel / static_cast<double>(test.size()))};
  };
  eval::Table table{{"method", "OPT", "rel.err"}, {}};
  table.add_row(row("NIE", phi, true));
  table.add_row(row("Euclidean", eucl, true));
  // MDS on more than 1500 points is computed on an FPS subset, so no OPT
  const bool mds_full = test.front().cloud.size() <= 1500;
  table.add_row(row("MDS", mds, mds_full));

  ctx.prepare();
  eval::write_table(ctx.out / "eval", table);
  std::printf("%s", eval::format_text(table).c_str());

  if (!args.nim.empty()) {
    const match::NimModel nim = load_nim(args.nim, c);
    eval::Table mt{{"pair", "corrupt", "kept", "match.err"}, {}};
    double total = 0.0;
    for (const auto& p : pairs) {
      const auto& x = test[static_cast<std::size_t>(p.x)];
      const auto& y = test[static_cast<std::size_t>(p.y)];
      const geom::CorruptedCloud yc = corrupt_target(c, y);
      const match::InferredMap m = match::infer_map(x.cloud, yc.cloud, nie, nim, c.get_double("nim.alpha"));
      fmap::PointMap gt;
      for (Index k : yc.kept) gt.push_back(p.gt[static_cast<std::size_t>(k)]);
      const double err = eval::mean_geodesic_error(m.y_to_x, gt, x.geo);
      total += err;
      mt.add_row({x.name + "/" + y.name, c.get_string("eval.corrupt"), std::to_string(yc.kept.size()), eval::percent(err)});
    }
    mt.add_row({"mean", c.get_string("eval.corrupt"), "-", eval::percent(total / static_cast<double>(pairs.size()))});
    eval::write_table(ctx.out / "match_eval", mt);
    std::printf("%s", eval::format_text(mt).c_str());
  }
  return 0;
}

int run_segment(const RunContext& ctx, const SegmentArgs& args) {
  const Config& c = ctx.config;
  const embed::NieModel nie = load_nie(args.nie, c);
  // mesh vertices are kept as is so that a geodesic file stays aligned
  geom::PointCloud cloud;
  if (args.input.extension() == ".off") {
    cloud.positions = io::read_off(args.input).vertices;
    cloud.validate();
  } else {
    cloud = io::read_cloud(args.input);
  }
  const Index count = c.get_index("segment.landmarks");
  require(count >= 1 && count <= cloud.size(), ErrorCode::kConfig, "config: segment.landmarks out of range");
  const auto start = static_cast<Index>(c.get_seed("segment.seed") % static_cast<std::uint64_t>(cloud.size()));
  const IndexList landmarks = geom::farthest_point_sampling(cloud.positions, count, start);
  const IndexList labels = eval::landmark_segmentation(embed::embed(nie, cloud), landmarks);
  ctx.prepare();
  eval::write_segmentation(ctx.out / args.input.stem(), cloud, labels);
  io::write_indices(ctx.out / "landmarks.txt", landmarks);
  if (!args.geodesics.empty()) {
    const geom::GeodesicMatrix g = io::read_geodesics(args.geodesics);
    require(g.size() == cloud.size(), ErrorCode::kData, "segment: geodesic size mismatch");
    const double nie_agree = eval::agreement(labels, eval::geodesic_segmentation(g, landmarks));
    const double eucl_agree = eval::agreement(
        eval::landmark_segmentation(eval::euclidean_baseline(cloud), landmarks), eval::geodesic_segmentation(g, landmarks));
    eval::Table t{{"embedding", "agreement"}, {}};
    t.add_row({"NIE", eval::percent(nie_agree)});
    t.add_row({"Euclidean", eval::percent(eucl_agree)});
    eval::write_table(ctx.out / "segment", t);
    std::printf("%s", eval::format_text(t).c_str());
  }
  return 0;
}

int run_ablate(const RunContext& ctx, const fs::path& data) {
  const Config& c = ctx.config;
  eval::AblationConfig ac;
  ac.backbone = backbone_config(c, "backbone");
  ac.descriptor = backbone_config(c, "descriptor");
  ac.nie = nie_config(c);
  ac.nie.validate(ac.backbone.out_dim);
  ac.nim = nim_config(c);
  ac.train_nim = c.get_bool("ablate.train_nim");
  ac.parallel = c.get_bool("ablate.parallel");
  const auto train = read_split(data / "train", true);
  const auto test = read_split(data / "test", true);
  eval::AblationData ad{nie_samples(train), nie_samples(test), consecutive_pairs(test)};
  ctx.prepare();
  const auto results = eval::run_ablation(eval::default_ablation_grid(ac.nie.weights), ad, ac,
                                          [](const eval::AblationResult& r) {
                                            spdlog::info("ablate: {} done, OPT {}", r.name, eval::percent(r.opt));
                                          });
  const eval::Table table = eval::ablation_table(results);
  eval::write_table(ctx.out / "ablation", table);
  std::printf("%s", eval::format_text(table).c_str());
  return 0;
}

int run_gradcheck(const RunContext& ctx) {
  const std::uint64_t seed = ctx.config.get_seed("nie.seed");
  auto results = ad::check_ops(seed);
  for (auto& r : eval::loss_gradchecks(seed)) results.push_back(r);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %s rel_error=%.3e tol=%.0e\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.rel_error, r.tolerance);
    ok = ok && r.pass;
  }
  std::printf("gradcheck: %zu checks, %s\n", results.size(), ok ? "all passed" : "FAILURES");
  if (!ctx.out.empty()) ctx.prepare();
  return ok ? 0 : 4;
}

}  // namespace nie::cli
