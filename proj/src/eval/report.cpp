// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/eval/report.hpp"

#include <spdlog/fmt/fmt.h>

#include <algorithm>
#include <fstream>

#include "nie/common/error.hpp"

namespace nie::eval {

void Table::add_row(std::vector<std::string> row) {
  require(row.size() == header.size(), ErrorCode::kShape, "Table: row width differs from header");
  rows.push_back(std::move(row));
}

std::string format_text(const Table& table) {
  std::vector<std::size_t> width(table.header.size(), 0);
  for (std::size_t c = 0; c < width.size(); ++c) {
    width[c] = table.header[c].size();
    for (const auto& row : table.rows) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += "  ";
      // first column left-aligned, numbers right-aligned
      out += c == 0 ? fmt::format("{:<{}}", cells[c], width[c]) : fmt::format("{:>{}}", cells[c], width[c]);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(table.header);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.emplace_back(w, '-');
  out += line(rule);
  for (const auto& row : table.rows) out += line(row);
  return out;
}

std::string format_csv(const Table& table) {
  auto cell = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += ',';
      out += cell(cells[c]);
    }
    return out + "\n";
  };
  std::string out = line(table.header);
  for (const auto& row : table.rows) out += line(row);
  return out;
}

void write_table(const std::filesystem::path& base, const Table& table) {
  for (const auto& [ext, text] : {std::pair{".txt", format_text(table)}, std::pair{".csv", format_csv(table)}}) {
    std::filesystem::path p = base;
    p += ext;
    std::ofstream f(p);
    require(static_cast<bool>(f), ErrorCode::kIo, "write_table: cannot open " + p.string());
    f << text;
  }
}

std::string percent(double value, int digits) { return fmt::format("{:.{}f}", 100.0 * value, digits); }

std::vector<io::Rgb> label_colors(const IndexList& labels) {
  static constexpr io::Rgb kPalette[] = {
      {230, 25, 75},  {60, 180, 75},  {255, 225, 25}, {0, 130, 200},  {245, 130, 48},
      {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {210, 245, 60}, {0, 128, 128}};
  constexpr auto kCount = sizeof(kPalette) / sizeof(kPalette[0]);
  std::vector<io::Rgb> out;
  out.reserve(labels.size());
  for (Index l : labels) {
    const auto u = static_cast<std::uint64_t>(l);
    if (u < kCount) {
      out.push_back(kPalette[u]);
    } else {
      const std::uint64_t h = (u + 1) * 0x9E3779B97F4A7C15ULL;
      out.push_back({static_cast<std::uint8_t>(h >> 56), static_cast<std::uint8_t>(h >> 48),
                     static_cast<std::uint8_t>(h >> 40)});
    }
  }
  return out;
}

void write_segmentation(const std::filesystem::path& base, const geom::PointCloud& cloud,
                        const IndexList& labels) {
  require(static_cast<Index>(labels.size()) == cloud.size(), ErrorCode::kShape,
          "write_segmentation: one label per point required");
  std::filesystem::path txt = base, ply = base;
  txt += ".labels";
  ply += ".ply";
  io::write_indices(txt, labels);
  const std::vector<io::Rgb> colors = label_colors(labels);
  io::write_ply_cloud(ply, cloud, &colors);
}

}  // namespace nie::eval
