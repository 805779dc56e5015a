// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nie/geom/types.hpp"
#include "nie/io/io.hpp"

namespace nie::eval {

/// Rows of preformatted cells under a header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

/// Space-aligned columns, one line per row, header underlined with dashes.
std::string format_text(const Table& table);

/// RFC 4180 style; cells containing commas or quotes are quoted.
std::string format_csv(const Table& table);

/// Writes `<base>.txt` and `<base>.csv`.
void write_table(const std::filesystem::path& base, const Table& table);

/// x1 metric to the x100 reporting scale, fixed-point with `digits` decimals.
std::string percent(double value, int digits = 2);

/// Distinct colours for small label counts, hashed beyond the palette.
std::vector<io::Rgb> label_colors(const IndexList& labels);

/// Per-point labels as an integer list plus a coloured PLY cloud.
void write_segmentation(const std::filesystem::path& base, const geom::PointCloud& cloud,
                        const IndexList& labels);

}  // namespace nie::eval
