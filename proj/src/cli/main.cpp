// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "nie/common/error.hpp"

namespace {

using nie::ErrorCode;

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return 2;
    case ErrorCode::kNumeric:
      return 4;
    default:
      return 3;
  }
}

void report(std::string_view code, const std::string& message) {
  std::string flat = message;
  for (char& ch : flat) {
    if (ch == '\n' || ch == '"') ch = '\'';
  }
  std::fprintf(stderr, "error code=%.*s message=\"%s\"\n", static_cast<int>(code.size()), code.data(), flat.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using namespace nie::cli;

  CLI::App app{"Intrinsic embeddings and descriptor matching for point clouds"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  fs::path config_file;
  std::vector<std::string> overrides;
  fs::path out = "out";
  bool quiet = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_file, "INI configuration file");
    sub->add_option("-s,--set", overrides, "Override, section.key=value (repeatable)");
    sub->add_option("-o,--out", out, "Output directory")->capture_default_str();
    sub->add_flag("-q,--quiet", quiet, "Only log warnings");
    return sub;
  };

  fs::path data;
  TrainNimArgs nim_args;
  EmbedArgs embed_args;
  MatchArgs match_args;
  EvalArgs eval_args;
  SegmentArgs segment_args;

  auto* gen = common(app.add_subcommand("gen-data", "Generate train and test shape families"));
  auto* geo = common(app.add_subcommand("geodesics", "Write geodesic matrices for every stored shape"));
  geo->add_option("-d,--data", data, "Dataset directory")->required();
  auto* tnie = common(app.add_subcommand("train-nie", "Train the intrinsic embedding network"));
  tnie->add_option("-d,--data", data, "Dataset directory")->required();
  auto* tnim = common(app.add_subcommand("train-nim", "Train the descriptor network against a frozen embedding"));
  tnim->add_option("-d,--data", nim_args.data, "Dataset directory")->required();
  tnim->add_option("--nie", nim_args.nie, "NIE checkpoint base path")->required();
  auto* emb = common(app.add_subcommand("embed", "Embed one point cloud"));
  emb->add_option("--nie", embed_args.nie, "NIE checkpoint base path")->required();
  emb->add_option("-i,--input", embed_args.input, "Point cloud (.xyz, .ply, .off)")->required()->check(CLI::ExistingFile);
  emb->add_flag("--raw", embed_args.raw_units, "Rescale to the training diagonal first");
  auto* mat = common(app.add_subcommand("match", "Infer point maps between two clouds"));
  mat->add_option("--nie", match_args.nie, "NIE checkpoint base path")->required();
  mat->add_option("--nim", match_args.nim, "NIM checkpoint base path")->required();
  mat->add_option("-x", match_args.x, "Source cloud")->required()->check(CLI::ExistingFile);
  mat->add_option("-y", match_args.y, "Target cloud")->required()->check(CLI::ExistingFile);
  auto* ev = common(app.add_subcommand("eval", "Metric tables on the test split"));
  ev->add_option("-d,--data", eval_args.data, "Dataset directory")->required();
  ev->add_option("--nie", eval_args.nie, "NIE checkpoint base path")->required();
  ev->add_option("--nim", eval_args.nim, "NIM checkpoint base path");
  auto* seg = common(app.add_subcommand("segment", "Landmark segmentation of one shape"));
  seg->add_option("--nie", segment_args.nie, "NIE checkpoint base path")->required();
  seg->add_option("-i,--input", segment_args.input, "Shape (.off keeps vertex order)")->required()->check(CLI::ExistingFile);
  seg->add_option("-g,--geodesics", segment_args.geodesics, "Reference geodesics for agreement")->check(CLI::ExistingFile);
  auto* abl = common(app.add_subcommand("ablate", "Loss ablation report"));
  abl->add_option("-d,--data", data, "Dataset directory")->required();
  auto* grad = common(app.add_subcommand("gradcheck", "Finite-difference checks of every op and loss"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("CONFIG", e.what());
    return 2;
  }
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  CLI::App* sub = app.get_subcommands().front();
  try {
    RunContext ctx;
    ctx.command = sub->get_name();
    ctx.out = out;
    if (!config_file.empty()) ctx.config.load(config_file);
    for (const auto& o : overrides) ctx.config.set(o);

    if (sub == gen) return run_gen_data(ctx);
    if (sub == geo) return run_geodesics(ctx, data);
    if (sub == tnie) return run_train_nie(ctx, data);
    if (sub == tnim) return run_train_nim(ctx, nim_args);
    if (sub == emb) return run_embed(ctx, embed_args);
    if (sub == mat) return run_match(ctx, match_args);
    if (sub == ev) return run_eval(ctx, eval_args);
    if (sub == seg) return run_segment(ctx, segment_args);
    if (sub == abl) return run_ablate(ctx, data);
    if (sub == grad) {
      // gradcheck writes nothing unless an output directory is given explicitly
      if (sub->count("--out") == 0) ctx.out.clear();
      return run_gradcheck(ctx);
    }
  } catch (const nie::Error& e) {
    report(nie::to_string(e.code()), e.what());
    return exit_status(e.code());
  } catch (const std::exception& e) {
    report("INTERNAL", e.what());
    return 3;
  }
  return 0;
}
