// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/eval/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "nie/common/error.hpp"
#include "nie/geom/geometry.hpp"

namespace nie::eval {

double mean_geodesic_error(const fmap::PointMap& pred, const fmap::PointMap& gt,
                           const geom::GeodesicMatrix& geo_target) {
  require(pred.size() == gt.size() && !pred.empty(), ErrorCode::kShape,
          "mean_geodesic_error: maps must be non-empty and equally long");
  const Mat d = geo_target.finite_for_loss();
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require(pred[i] >= 0 && pred[i] < d.rows() && gt[i] >= 0 && gt[i] < d.rows(), ErrorCode::kSize,
            "mean_geodesic_error: index out of range");
    total += d(pred[i], gt[i]);
  }
  return total / static_cast<double>(pred.size());
}

double relative_embedding_error(const Mat& phi, const geom::GeodesicMatrix& geo, double floor) {
  require(phi.rows() == geo.size(), ErrorCode::kShape, "relative_embedding_error: size mismatch");
  double total = 0.0;
  Index count = 0;
  for (Index p = 0; p < phi.rows(); ++p) {
    for (Index q = p + 1; q < phi.rows(); ++q) {
      const double s = geo.dist(p, q);
      if (!(s > floor) || !std::isfinite(s)) continue;
      const double e = (phi.row(p) - phi.row(q)).norm();
      total += (e - s) * (e - s) / (s * s);
      ++count;
    }
  }
  require(count > 0, ErrorCode::kSize, "relative_embedding_error: no usable pairs");
  return total / static_cast<double>(count);
}

double opt_metric(const Mat& phi_x, const Mat& phi_y, const fmap::PointMap& gt,
                  const geom::GeodesicMatrix& geo_x) {
  const fmap::FunctionalMap c = fmap::encode_map(gt, phi_x, phi_y);
  const fmap::PointMap recovered = fmap::decode_map(c, phi_x, phi_y);
  return mean_geodesic_error(recovered, gt, geo_x);
}

MdsResult mds_classical(const geom::GeodesicMatrix& geo, Index k, Index cap) {
  require(k >= 1, ErrorCode::kSize, "mds_classical: k must be >= 1");
  MdsResult out;
  Mat d = geo.finite_for_loss();
  if (d.rows() > cap) {
    // FPS in the metric of the distance matrix itself.
    const Index n = d.rows();
    Vec nearest = Vec::Constant(n, std::numeric_limits<double>::infinity());
    Index current = 0;
    for (Index s = 0; s < cap; ++s) {
      out.points.push_back(current);
      nearest = nearest.cwiseMin(d.row(current).transpose());
      for (Index p : out.points) nearest(p) = -1.0;
      nearest.maxCoeff(&current);
    }
    d = take_block(d, out.points);
    out.warnings.push_back("input reduced to " + std::to_string(cap) + " points by FPS");
  } else {
    out.points = iota_indices(d.rows());
  }
  const Index n = d.rows();
  const Mat j = Mat::Identity(n, n) - Mat::Constant(n, n, 1.0 / static_cast<double>(n));
  const Mat b = -0.5 * j * d.cwiseAbs2() * j;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(0.5 * (b + b.transpose())));
  require(eig.info() == Eigen::Success, ErrorCode::kNumeric, "mds_classical: eigensolver failed");
  out.embedding = Mat::Zero(n, k);
  const Eigen::VectorXd& values = eig.eigenvalues();
  for (Index c = 0; c < std::min(k, n); ++c) {
    const Index src = n - 1 - c;  // ascending order
    if (!(values(src) > 0.0)) break;
    out.embedding.col(c) = eig.eigenvectors().col(src) * std::sqrt(values(src));
    ++out.positive_dims;
  }
  if (out.positive_dims < k) {
    out.warnings.push_back("only " + std::to_string(out.positive_dims) +
                           " positive eigenvalues; remaining columns are zero");
  }
  return out;
}

Mat euclidean_baseline(const geom::PointCloud& cloud) {
  Mat x = cloud.positions.rowwise() - cloud.positions.colwise().mean();
  const double rms = std::sqrt(x.rowwise().squaredNorm().mean());
  require(rms > 0.0, ErrorCode::kDegenerateInput, "euclidean_baseline: zero extent");
  return x / rms;
}

IndexList landmark_segmentation(const Mat& phi, const IndexList& landmarks) {
  require(!landmarks.empty(), ErrorCode::kSize, "landmark_segmentation: no landmarks");
  return geom::nearest_neighbor(phi, take_rows(phi, landmarks));
}

IndexList geodesic_segmentation(const geom::GeodesicMatrix& geo, const IndexList& landmarks) {
  require(!landmarks.empty(), ErrorCode::kSize, "geodesic_segmentation: no landmarks");
  IndexList labels(static_cast<std::size_t>(geo.size()));
  for (Index p = 0; p < geo.size(); ++p) {
    Index best = 0;
    for (std::size_t l = 1; l < landmarks.size(); ++l) {
      if (geo.dist(p, landmarks[l]) < geo.dist(p, landmarks[static_cast<std::size_t>(best)])) {
        best = static_cast<Index>(l);
      }
    }
    labels[static_cast<std::size_t>(p)] = best;
  }
  return labels;
}

double agreement(const IndexList& a, const IndexList& b) {
  require(a.size() == b.size() && !a.empty(), ErrorCode::kShape, "agreement: length mismatch");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace nie::eval
