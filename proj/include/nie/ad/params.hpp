// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nie/ad/tape.hpp"

namespace nie::ad {

/// Named learnable tensors in insertion order.
class ParameterSet {
 public:
  void add(const std::string& name, Matrix value);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const Matrix& at(const std::string& name) const;
  Matrix& at(const std::string& name);
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::size_t scalar_count() const;

  /// Registers every tensor as a named leaf (trainable) or constant.
  std::map<std::string, Var> bind(Tape& tape, bool trainable) const;

  std::uint64_t init_seed = 0;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::map<std::string, std::size_t> index_;
};

using GradMap = std::map<std::string, Matrix>;

/// Adds `other` into `into`, creating missing entries.
void accumulate_grads(GradMap& into, const GradMap& other, double weight = 1.0);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::map<std::string, Matrix> first_moment;
  std::map<std::string, Matrix> second_moment;
};

/// One bias-corrected Adam update of every parameter that has a gradient.
void adam_step(ParameterSet& params, const GradMap& grads, AdamState& state, double lr);

/// lr_min + 0.5 (lr_max - lr_min)(1 + cos(pi step / total_steps)).
double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr_max, double lr_min);

/// Checkpoint = `<base>.manifest` (key-value text: metadata, then one
/// "tensor <name> <rows> <cols>" line per tensor) plus `<base>.bin`
/// ("NIEW", u32 version, u32 tensor count, little-endian f64 data in manifest
/// order).
struct Checkpoint {
  ParameterSet params;
  std::int64_t step = 0;
  std::string config_hash;
  std::map<std::string, std::string> metadata;
};

void save_checkpoint(const std::filesystem::path& base, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& base);

/// 64-bit FNV-1a of the text, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace nie::ad
