// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/fmap/fmap.hpp"

#include <cmath>
#include <set>

#include "nie/ad/ops.hpp"
#include "nie/common/error.hpp"
#include "nie/geom/geometry.hpp"

namespace nie::fmap {

using ad::Var;

namespace {

void require_finite(const Mat& m, const char* what) {
  require(m.allFinite(), ErrorCode::kNumeric, std::string(what) + ": non-finite input");
}

Mat spd_solve(const Mat& s, const Mat& b, const char* what) {
  Eigen::LLT<Mat> llt(s);
  require(llt.info() == Eigen::Success, ErrorCode::kNumeric, std::string(what) + ": system is not SPD");
  return llt.solve(b);
}

}  // namespace

Mat pinv_reg(const Mat& m, double eps) {
  require_finite(m, "pinv_reg");
  const Index k = m.cols();
  const Mat gram = m.transpose() * m + eps * Mat::Identity(k, k);
  return spd_solve(gram, m.transpose(), "pinv_reg");
}

Var pinv_reg(Var m, double eps) {
  const Var mt = ad::transpose(m);
  const Var gram = ad::add(ad::matmul(mt, m), ad::scale(ad::identity(m.tape(), m.cols()), eps));
  return ad::cholesky_solve(gram, mt);
}

Mat pinv_reg_square(const Mat& a, double eps) {
  require_finite(a, "pinv_reg_square");
  const Index k = a.rows();
  const Mat gram = a * a.transpose() + eps * Mat::Identity(k, k);
  return spd_solve(gram, a, "pinv_reg_square").transpose();
}

Var pinv_reg_square(Var a, double eps) {
  const Var gram =
      ad::add(ad::matmul(a, ad::transpose(a)), ad::scale(ad::identity(a.tape(), a.rows()), eps));
  return ad::transpose(ad::cholesky_solve(gram, a));
}

FunctionalMap encode_map(const PointMap& pi, const Mat& phi_x, const Mat& phi_y, double eps) {
  require(static_cast<Index>(pi.size()) == phi_y.rows(), ErrorCode::kShape,
          "encode_map: map length must equal the number of Y points");
  require(phi_x.cols() == phi_y.cols(), ErrorCode::kShape, "encode_map: embedding widths differ");
  for (Index t : pi) require(t >= 0 && t < phi_x.rows(), ErrorCode::kSize, "encode_map: index out of range");
  return pinv_reg(phi_y, eps) * take_rows(phi_x, pi);
}

Var encode_map(const PointMap& pi, Var phi_x, Var phi_y, double eps) {
  require(static_cast<Index>(pi.size()) == phi_y.rows(), ErrorCode::kShape,
          "encode_map: map length must equal the number of Y points");
  return ad::matmul(pinv_reg(phi_y, eps), ad::gather_rows(phi_x, pi));
}

PointMap decode_map(const FunctionalMap& c, const Mat& phi_src, const Mat& phi_tgt) {
  require(c.rows() == phi_tgt.cols() && c.cols() == phi_src.cols(), ErrorCode::kShape,
          "decode_map: functional map does not match embedding widths");
  return geom::nearest_neighbor(phi_tgt * c, phi_src);
}

FeatureMaps map_from_features(const Mat& phi_x, const Mat& phi_y, const Mat& g_x, const Mat& g_y,
                              double eps) {
  require(phi_x.cols() == phi_y.cols() && g_x.cols() == g_y.cols(), ErrorCode::kShape,
          "map_from_features: width mismatch");
  require(g_x.cols() >= phi_x.cols(), ErrorCode::kNumeric,
          "map_from_features: feature dimension below embedding dimension");
  const Mat a_x = pinv_reg(phi_x, eps) * g_x;
  const Mat a_y = pinv_reg(phi_y, eps) * g_y;
  return {a_x * pinv_reg_square(a_y, eps), a_y * pinv_reg_square(a_x, eps)};
}

std::pair<Var, Var> map_from_features(Var phi_x, Var phi_y, Var g_x, Var g_y, double eps) {
  require(g_x.cols() >= phi_x.cols(), ErrorCode::kNumeric,
          "map_from_features: feature dimension below embedding dimension");
  const Var a_x = ad::matmul(pinv_reg(phi_x, eps), g_x);
  const Var a_y = ad::matmul(pinv_reg(phi_y, eps), g_y);
  return {ad::matmul(a_x, pinv_reg_square(a_y, eps)), ad::matmul(a_y, pinv_reg_square(a_x, eps))};
}

Mat soft_correspondence(const Mat& phi_src, const Mat& phi_tgt, const FunctionalMap& c,
                        double alpha) {
  Mat logits = -alpha * pairwise_distances(phi_src * c, phi_tgt);
  for (Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - top).exp().matrix();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

Var soft_correspondence(Var phi_src, Var phi_tgt, Var c, double alpha) {
  return ad::softmax_rows(ad::scale(ad::distance_matrix(ad::matmul(phi_src, c), phi_tgt), -alpha));
}

double mean_row_entropy(const Mat& p) {
  double total = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) > 0.0) total -= p(i, j) * std::log(p(i, j));
    }
  }
  return p.rows() > 0 ? total / static_cast<double>(p.rows()) : 0.0;
}

double soft_correspondence_entropy(const Mat& phi_src, const Mat& phi_tgt, const FunctionalMap& c,
                                   double alpha) {
  const Mat mapped = phi_src * c;
  double total = 0.0;
  Eigen::RowVectorXd logits(phi_tgt.rows());
  for (Index i = 0; i < mapped.rows(); ++i) {
    for (Index j = 0; j < phi_tgt.rows(); ++j) logits(j) = -alpha * (mapped.row(i) - phi_tgt.row(j)).norm();
    const double top = logits.maxCoeff();
    const double log_z = top + std::log((logits.array() - top).exp().sum());
    const Eigen::ArrayXd logp = logits.array() - log_z;
    total -= (logp.exp() * logp).sum();
  }
  return mapped.rows() > 0 ? total / static_cast<double>(mapped.rows()) : 0.0;
}

std::vector<std::string> map_health(const FunctionalMap& c, const PointMap& map, Index n_targets) {
  std::vector<std::string> warnings;
  if (c.norm() < 1e-8) warnings.emplace_back("functional map is numerically zero");
  const std::set<Index> distinct(map.begin(), map.end());
  if (!map.empty() && static_cast<double>(distinct.size()) < 0.1 * static_cast<double>(std::min<Index>(n_targets, static_cast<Index>(map.size())))) {
    warnings.emplace_back("point map collapsed onto " + std::to_string(distinct.size()) + " targets");
  }
  return warnings;
}

}  // namespace nie::fmap
