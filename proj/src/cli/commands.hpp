// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "cli/config.hpp"

namespace nie::cli {

namespace fs = std::filesystem;

/// Resolved configuration plus the output directory of one command.
struct RunContext {
  Config config;
  fs::path out;
  std::string command;

  /// Creates `out` and writes the resolved config next to the outputs.
  void prepare() const;
};

struct TrainNimArgs {
  fs::path data;
  fs::path nie;
};

struct EmbedArgs {
  fs::path nie;
  fs::path input;
  bool raw_units = false;
};

struct MatchArgs {
  fs::path nie;
  fs::path nim;
  fs::path x;
  fs::path y;
};

struct EvalArgs {
  fs::path data;
  fs::path nie;
  fs::path nim;  // optional
};

struct SegmentArgs {
  fs::path nie;
  fs::path input;
  fs::path geodesics;  // optional
};

int run_gen_data(const RunContext& ctx);
int run_geodesics(const RunContext& ctx, const fs::path& data);
int run_train_nie(const RunContext& ctx, const fs::path& data);
int run_train_nim(const RunContext& ctx, const TrainNimArgs& args);
int run_embed(const RunContext& ctx, const EmbedArgs& args);
int run_match(const RunContext& ctx, const MatchArgs& args);
int run_eval(const RunContext& ctx, const EvalArgs& args);
int run_segment(const RunContext& ctx, const SegmentArgs& args);
int run_ablate(const RunContext& ctx, const fs::path& data);
int run_gradcheck(const RunContext& ctx);

}  // namespace nie::cli
