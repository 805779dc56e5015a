// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "nie/embed/nie.hpp"
#include "nie/match/nim.hpp"
#include "nie/net/backbone.hpp"

namespace nie::cli {

/// INI configuration with a fixed schema. Every known key has a default;
/// unknown sections or keys are rejected.
class Config {
 public:
  Config();

  /// Reads an INI file over the defaults.
  void load(const std::filesystem::path& path);

  /// Applies "section.key=value".
  void set(const std::string& assignment);

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  Index get_index(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<Index> get_index_list(const std::string& key) const;

  /// All keys in schema order, as INI text.
  std::string resolved_text() const;
  std::string hash() const;
  void save(const std::filesystem::path& path) const;

 private:
  void assign(const std::string& key, const std::string& value);
  const std::string& raw(const std::string& key) const;

  boost::property_tree::ptree tree_;
};

net::BackboneConfig backbone_config(const Config& c, const std::string& section);
embed::NieTrainConfig nie_config(const Config& c);
match::NimTrainConfig nim_config(const Config& c);

}  // namespace nie::cli
