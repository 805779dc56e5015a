// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nie/ad/tape.hpp"
#include "nie/common/linalg.hpp"

namespace nie::fmap {

// Direction conventions, used by every call site:
//   encode_map(pi, phi_x, phi_y) with pi: Y -> X gives C such that
//   phi_y * C ~ phi_x[pi]; decode_map(C, phi_x, phi_y) recovers pi.
//   map_from_features gives C with phi_x * C ~ phi_y[T] for T: X -> Y, and
//   C_tilde with phi_y * C_tilde ~ phi_x[T'] for T': Y -> X.

using PointMap = IndexList;   // target index per source point
using FunctionalMap = Mat;    // k x k
using Embedding = Mat;        // n x k

constexpr double kPinvEps = 1e-6;

/// (m^T m + eps I)^-1 m^T, k x n.
Mat pinv_reg(const Mat& m, double eps = kPinvEps);
ad::Var pinv_reg(ad::Var m, double eps = kPinvEps);

/// a^T (a a^T + eps I)^-1 for a wide k x d matrix, d x k.
Mat pinv_reg_square(const Mat& a, double eps = kPinvEps);
ad::Var pinv_reg_square(ad::Var a, double eps = kPinvEps);

FunctionalMap encode_map(const PointMap& pi, const Mat& phi_x, const Mat& phi_y,
                         double eps = kPinvEps);
ad::Var encode_map(const PointMap& pi, ad::Var phi_x, ad::Var phi_y, double eps = kPinvEps);

/// For each row of phi_tgt * c, the index of the nearest row of phi_src.
PointMap decode_map(const FunctionalMap& c, const Mat& phi_src, const Mat& phi_tgt);

struct FeatureMaps {
  FunctionalMap c;        // phi_x * c ~ phi_y rows
  FunctionalMap c_tilde;  // phi_y * c_tilde ~ phi_x rows
};

FeatureMaps map_from_features(const Mat& phi_x, const Mat& phi_y, const Mat& g_x, const Mat& g_y,
                              double eps = kPinvEps);
std::pair<ad::Var, ad::Var> map_from_features(ad::Var phi_x, ad::Var phi_y, ad::Var g_x,
                                              ad::Var g_y, double eps = kPinvEps);

/// Row j: softmax over i of -alpha ||(phi_src c)_j - (phi_tgt)_i||; n_src x n_tgt.
Mat soft_correspondence(const Mat& phi_src, const Mat& phi_tgt, const FunctionalMap& c,
                        double alpha = 30.0);
ad::Var soft_correspondence(ad::Var phi_src, ad::Var phi_tgt, ad::Var c, double alpha = 30.0);

/// Mean Shannon entropy (nats) of the rows of a row-stochastic matrix.
double mean_row_entropy(const Mat& p);

/// Mean row entropy of soft_correspondence(phi_src, phi_tgt, c, alpha),
/// evaluated one row at a time.
double soft_correspondence_entropy(const Mat& phi_src, const Mat& phi_tgt, const FunctionalMap& c,
                                   double alpha = 30.0);

/// Warnings for degenerate maps: vanishing C or a collapsed point map.
std::vector<std::string> map_health(const FunctionalMap& c, const PointMap& map, Index n_targets);

}  // namespace nie::fmap
