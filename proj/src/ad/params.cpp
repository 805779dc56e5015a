// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/ad/params.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nie/common/error.hpp"

namespace nie::ad {

namespace fs = std::filesystem;

void ParameterSet::add(const std::string& name, Matrix value) {
  require(!contains(name), ErrorCode::kConfig, "duplicate parameter '" + name + "'");
  index_[name] = values_.size();
  names_.push_back(name);
  values_.push_back(std::move(value));
}

const Matrix& ParameterSet::at(const std::string& name) const {
  const auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kConfig, "unknown parameter '" + name + "'");
  return values_[it->second];
}

Matrix& ParameterSet::at(const std::string& name) {
  const auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kConfig, "unknown parameter '" + name + "'");
  return values_[it->second];
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

std::map<std::string, Var> ParameterSet::bind(Tape& tape, bool trainable) const {
  std::map<std::string, Var> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    out[names_[i]] = trainable ? tape.leaf(values_[i], names_[i]) : tape.constant(values_[i]);
  }
  return out;
}

void accumulate_grads(GradMap& into, const GradMap& other, double weight) {
  for (const auto& [name, g] : other) {
    auto it = into.find(name);
    if (it == into.end()) {
      into.emplace(name, weight * g);
    } else {
      it->second += weight * g;
    }
  }
}

void adam_step(ParameterSet& params, const GradMap& grads, AdamState& state, double lr) {
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (const auto& name : params.names()) {
    const auto git = grads.find(name);
    if (git == grads.end()) continue;
    Matrix& p = params.at(name);
    const Matrix& g = git->second;
    require(g.rows() == p.rows() && g.cols() == p.cols(), ErrorCode::kShape,
            "adam_step: gradient shape mismatch for '" + name + "'");
    auto [mit, m_new] = state.first_moment.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
    auto [vit, v_new] = state.second_moment.try_emplace(name, Matrix::Zero(p.rows(), p.cols()));
    Matrix& m = mit->second;
    Matrix& v = vit->second;
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseAbs2();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  }
}

double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr_max, double lr_min) {
  if (total_steps <= 0) return lr_max;
  const double t = static_cast<double>(std::clamp<std::int64_t>(step, 0, total_steps)) /
                   static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * t));
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

fs::path with_suffix(const fs::path& base, const char* suffix) {
  return fs::path(base.string() + suffix);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in.get())) << (8 * b);
  require(in.good(), ErrorCode::kIo, "checkpoint: truncated blob header");
  return v;
}

}  // namespace

void save_checkpoint(const fs::path& base, const Checkpoint& ckpt) {
  if (base.has_parent_path()) fs::create_directories(base.parent_path());
  std::ofstream manifest(with_suffix(base, ".manifest"));
  require(manifest.good(), ErrorCode::kIo, "cannot write checkpoint manifest");
  manifest << "format NIEW\nversion 1\n";
  manifest << "step " << ckpt.step << "\n";
  manifest << "config_hash " << ckpt.config_hash << "\n";
  manifest << "init_seed " << ckpt.params.init_seed << "\n";
  for (const auto& [k, v] : ckpt.metadata) manifest << "meta " << k << ' ' << v << "\n";
  for (const auto& name : ckpt.params.names()) {
    const Matrix& m = ckpt.params.at(name);
    manifest << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << "\n";
  }
  std::ofstream blob(with_suffix(base, ".bin"), std::ios::binary);
  require(blob.good(), ErrorCode::kIo, "cannot write checkpoint blob");
  blob.write("NIEW", 4);
  put_u32(blob, 1);
  put_u32(blob, static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& name : ckpt.params.names()) {
    const Matrix& m = ckpt.params.at(name);
    for (Index i = 0; i < m.size(); ++i) {
      const auto bits = std::bit_cast<std::uint64_t>(m.data()[i]);
      for (int b = 0; b < 8; ++b) blob.put(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
}

Checkpoint load_checkpoint(const fs::path& base) {
  std::ifstream manifest(with_suffix(base, ".manifest"));
  require(manifest.good(), ErrorCode::kData, "missing checkpoint manifest: " + base.string());
  Checkpoint ckpt;
  struct Entry {
    std::string name;
    Index rows, cols;
  };
  std::vector<Entry> entries;
  std::string line;
  while (std::getline(manifest, line)) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "format") {
      std::string f;
      ss >> f;
      require(f == "NIEW", ErrorCode::kData, "checkpoint: unknown format");
    } else if (key == "version") {
      int v = 0;
      ss >> v;
      require(v == 1, ErrorCode::kData, "checkpoint: unsupported version");
    } else if (key == "step") {
      ss >> ckpt.step;
    } else if (key == "config_hash") {
      ss >> ckpt.config_hash;
    } else if (key == "init_seed") {
      ss >> ckpt.params.init_seed;
    } else if (key == "meta") {
      std::string k, v;
      ss >> k;
      std::getline(ss >> std::ws, v);
      ckpt.metadata[k] = v;
    } else if (key == "tensor") {
      Entry e;
      ss >> e.name >> e.rows >> e.cols;
      require(!ss.fail(), ErrorCode::kData, "checkpoint: malformed tensor line");
      entries.push_back(e);
    }
  }
  std::ifstream blob(with_suffix(base, ".bin"), std::ios::binary);
  require(blob.good(), ErrorCode::kData, "missing checkpoint blob: " + base.string());
  char magic[4];
  blob.read(magic, 4);
  require(blob.good() && std::string(magic, 4) == "NIEW", ErrorCode::kData, "checkpoint: bad blob magic");
  require(get_u32(blob) == 1, ErrorCode::kData, "checkpoint: unsupported blob version");
  require(get_u32(blob) == entries.size(), ErrorCode::kData, "checkpoint: tensor count mismatch");
  for (const auto& e : entries) {
    Matrix m(e.rows, e.cols);
    for (Index i = 0; i < m.size(); ++i) {
      unsigned char b[8];
      blob.read(reinterpret_cast<char*>(b), 8);
      require(blob.good(), ErrorCode::kData, "checkpoint: truncated blob");
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
      m.data()[i] = std::bit_cast<double>(bits);
    }
    ckpt.params.add(e.name, std::move(m));
  }
  return ckpt;
}

}  // namespace nie::ad
