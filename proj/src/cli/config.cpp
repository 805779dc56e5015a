// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include <charconv>
#include <fstream>
#include <utility>

#include "nie/ad/params.hpp"
#include "nie/common/error.hpp"

namespace nie::cli {

namespace pt = boost::property_tree;

namespace {

// section.key and default, in the order written to resolved configs
const std::vector<std::pair<std::string, std::string>>& schema() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"data.family", "strip"},
      {"data.train_count", "20"},
      {"data.test_count", "4"},
      {"data.train_seed", "1"},
      {"data.test_seed", "99"},
      {"data.bend_min", "0"},
      {"data.bend_max", "3.141592653589793"},
      {"data.nu", "30"},
      {"data.nv", "10"},
      {"data.aspect", "3"},
      {"data.angle_min", "-1.5"},
      {"data.angle_max", "1.5"},
      {"data.links", "3"},
      {"geodesics.method", "analytic"},
      {"geodesics.knn_k", "8"},
      {"backbone.edgeconv_dims", "3,64,64,512"},
      {"backbone.head_hidden", "256,128"},
      {"backbone.out_dim", "20"},
      {"backbone.k", "16"},
      {"backbone.n_s", "3000"},
      {"backbone.modified_sampling", "true"},
      {"nie.seed", "0"},
      {"nie.epochs", "200"},
      {"nie.batch_size", "3"},
      {"nie.lr_max", "0.002"},
      {"nie.lr_min", "0.0002"},
      {"nie.lambda1", "1"},
      {"nie.lambda2", "1"},
      {"nie.lambda3", "0.5"},
      {"nie.alpha_kl", "10"},
      {"nie.pair_count", "65536"},
      {"nie.kl_sources", "64"},
      {"nie.bijectivity_m", "0"},
      {"nie.sample_points", "4995"},
      {"nie.absolute_geodesic", "false"},
      {"descriptor.edgeconv_dims", "3,64,64,512"},
      {"descriptor.head_hidden", "256,128"},
      {"descriptor.out_dim", "40"},
      {"descriptor.k", "16"},
      {"descriptor.n_s", "3000"},
      {"descriptor.modified_sampling", "true"},
      {"nim.seed", "0"},
      {"nim.epochs", "100"},
      {"nim.batch_size", "4"},
      {"nim.lr_max", "0.002"},
      {"nim.lr_min", "0.001"},
      {"nim.alpha", "30"},
      {"nim.loss_points", "512"},
      {"nim.fine_tune_nie", "false"},
      {"nim.geodesics", "truth"},
      {"eval.corrupt", "none"},
      {"eval.hole_centers", "10"},
      {"eval.hole_points", "6"},
      {"eval.cut_fraction", "0.1"},
      {"eval.seed", "0"},
      {"segment.landmarks", "5"},
      {"segment.seed", "0"},
      {"ablate.train_nim", "true"},
      {"ablate.parallel", "false"},
  };
  return keys;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  fail(ErrorCode::kConfig, "config: " + key + " = '" + value + "' is not " + what);
}

}  // namespace

Config::Config() {
  for (const auto& [key, value] : schema()) tree_.put(key, value);
}

void Config::load(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorCode::kData, "config: missing file " + path.string());
  pt::ptree file;
  try {
    pt::read_ini(path.string(), file);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : file) {
    require(!body.empty(), ErrorCode::kConfig, "config: top-level key '" + section + "' outside a section");
    for (const auto& [key, value] : body) assign(section + "." + key, value.data());
  }
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos, ErrorCode::kConfig, "config: expected section.key=value, got '" + assignment + "'");
  assign(boost::trim_copy(assignment.substr(0, eq)), boost::trim_copy(assignment.substr(eq + 1)));
}

void Config::assign(const std::string& key, const std::string& value) {
  bool known = false;
  for (const auto& entry : schema()) known = known || entry.first == key;
  require(known, ErrorCode::kConfig, "config: unknown key '" + key + "'");
  tree_.put(key, value);
}

const std::string& Config::raw(const std::string& key) const {
  const auto node = tree_.get_child_optional(key);
  require(static_cast<bool>(node), ErrorCode::kConfig, "config: unknown key '" + key + "'");
  return node->data();
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

double Config::get_double(const std::string& key) const {
  const std::string& s = raw(key);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) bad_value(key, s, "a number");
  return v;
}

Index Config::get_index(const std::string& key) const {
  const std::string& s = raw(key);
  Index v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) bad_value(key, s, "an integer");
  return v;
}

std::uint64_t Config::get_seed(const std::string& key) const {
  const std::string& s = raw(key);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) bad_value(key, s, "an unsigned integer");
  return v;
}

bool Config::get_bool(const std::string& key) const {
  const std::string s = boost::to_lower_copy(raw(key));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, raw(key), "a boolean");
}

std::vector<Index> Config::get_index_list(const std::string& key) const {
  std::vector<std::string> parts;
  boost::split(parts, raw(key), boost::is_any_of(","));
  std::vector<Index> out;
  for (auto& p : parts) {
    boost::trim(p);
    Index v = 0;
    const auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
    if (p.empty() || ec != std::errc() || end != p.data() + p.size()) bad_value(key, raw(key), "a comma-separated integer list");
    out.push_back(v);
  }
  return out;
}

std::string Config::resolved_text() const {
  std::string out, section;
  for (const auto& [key, unused] : schema()) {
    const std::string s = key.substr(0, key.find('.'));
    if (s != section) {
      out += (section.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += key.substr(s.size() + 1) + " = " + raw(key) + "\n";
  }
  return out;
}

std::string Config::hash() const { return ad::fnv1a_hex(resolved_text()); }

void Config::save(const std::filesystem::path& path) const {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorCode::kIo, "config: cannot write " + path.string());
  f << resolved_text();
}

net::BackboneConfig backbone_config(const Config& c, const std::string& section) {
  net::BackboneConfig b;
  b.edgeconv_dims = c.get_index_list(section + ".edgeconv_dims");
  b.head_hidden = c.get_index_list(section + ".head_hidden");
  b.out_dim = c.get_index(section + ".out_dim");
  b.k = c.get_index(section + ".k");
  b.n_s = c.get_index(section + ".n_s");
  b.modified_sampling = c.get_bool(section + ".modified_sampling");
  b.validate();
  return b;
}

embed::NieTrainConfig nie_config(const Config& c) {
  embed::NieTrainConfig t;
  t.seed = c.get_seed("nie.seed");
  t.epochs = c.get_index("nie.epochs");
  t.batch_size = c.get_index("nie.batch_size");
  t.lr_max = c.get_double("nie.lr_max");
  t.lr_min = c.get_double("nie.lr_min");
  t.weights = {c.get_double("nie.lambda1"), c.get_double("nie.lambda2"), c.get_double("nie.lambda3")};
  t.alpha_kl = c.get_double("nie.alpha_kl");
  t.pair_count = c.get_index("nie.pair_count");
  t.kl_sources = c.get_index("nie.kl_sources");
  t.bijectivity_m = c.get_index("nie.bijectivity_m");
  t.sample_points = c.get_index("nie.sample_points");
  t.absolute_geodesic = c.get_bool("nie.absolute_geodesic");
  return t;
}

match::NimTrainConfig nim_config(const Config& c) {
  match::NimTrainConfig t;
  t.seed = c.get_seed("nim.seed");
  t.epochs = c.get_index("nim.epochs");
  t.batch_size = c.get_index("nim.batch_size");
  t.lr_max = c.get_double("nim.lr_max");
  t.lr_min = c.get_double("nim.lr_min");
  t.alpha = c.get_double("nim.alpha");
  t.loss_points = c.get_index("nim.loss_points");
  t.fine_tune_nie = c.get_bool("nim.fine_tune_nie");
  t.validate();
  return t;
}

}  // namespace nie::cli
