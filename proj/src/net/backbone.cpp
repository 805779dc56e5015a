// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include "nie/net/backbone.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "nie/ad/ops.hpp"
#include "nie/common/error.hpp"
#include "nie/common/random.hpp"
#include "nie/geom/geometry.hpp"

namespace nie::net {

using ad::Matrix;
using ad::Var;

void BackboneConfig::validate() const {
  require(edgeconv_dims.size() >= 2, ErrorCode::kConfig, "backbone: need at least one EdgeConv layer");
  require(edgeconv_dims.front() == 3, ErrorCode::kConfig, "backbone: input dimension must be 3");
  for (Index d : edgeconv_dims) require(d >= 1, ErrorCode::kConfig, "backbone: dims must be positive");
  for (Index d : head_hidden) require(d >= 1, ErrorCode::kConfig, "backbone: dims must be positive");
  require(out_dim >= 1, ErrorCode::kConfig, "backbone: out_dim must be >= 1");
  require(k >= 1, ErrorCode::kConfig, "backbone: K must be >= 1");
  require(n_s >= 2, ErrorCode::kConfig, "backbone: n_s must be >= 2");
}

std::string BackboneConfig::describe() const {
  std::ostringstream out;
  out << "edgeconv_dims=";
  for (std::size_t i = 0; i < edgeconv_dims.size(); ++i) out << (i ? "," : "") << edgeconv_dims[i];
  out << ";head_hidden=";
  for (std::size_t i = 0; i < head_hidden.size(); ++i) out << (i ? "," : "") << head_hidden[i];
  out << ";out_dim=" << out_dim << ";k=" << k << ";n_s=" << n_s
      << ";modified_sampling=" << (modified_sampling ? 1 : 0);
  return out.str();
}

BackboneConfig BackboneConfig::parse(const std::string& described) {
  auto to_index = [&](const std::string& s) {
    Index v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(!s.empty() && ec == std::errc() && end == s.data() + s.size(), ErrorCode::kConfig,
            "backbone: malformed description '" + described + "'");
    return v;
  };
  auto to_list = [&](const std::string& s) {
    std::vector<Index> out;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      out.push_back(to_index(s.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  };
  std::map<std::string, std::string> fields;
  std::size_t start = 0;
  while (start <= described.size()) {
    auto end = described.find(';', start);
    if (end == std::string::npos) end = described.size();
    const std::string item = described.substr(start, end - start);
    const auto eq = item.find('=');
    require(eq != std::string::npos, ErrorCode::kConfig, "backbone: malformed description '" + described + "'");
    fields[item.substr(0, eq)] = item.substr(eq + 1);
    start = end + 1;
  }
  for (const char* key : {"edgeconv_dims", "head_hidden", "out_dim", "k", "n_s", "modified_sampling"}) {
    require(fields.count(key) == 1, ErrorCode::kConfig, std::string("backbone: description lacks ") + key);
  }
  BackboneConfig c;
  c.edgeconv_dims = to_list(fields["edgeconv_dims"]);
  c.head_hidden = fields["head_hidden"].empty() ? std::vector<Index>{} : to_list(fields["head_hidden"]);
  c.out_dim = to_index(fields["out_dim"]);
  c.k = to_index(fields["k"]);
  c.n_s = to_index(fields["n_s"]);
  c.modified_sampling = to_index(fields["modified_sampling"]) != 0;
  c.validate();
  return c;
}

NeighborAssignment modified_neighbor_assignment(const geom::PointCloud& cloud,
                                                const BackboneConfig& config) {
  const Index n = cloud.size();
  const Mat& x = cloud.positions;
  NeighborAssignment out;
  if (!config.modified_sampling) {
    require(config.k < n, ErrorCode::kSize, "neighbor assignment: K must be smaller than n");
    out.subsample = iota_indices(n);
    out.representative = iota_indices(n);
    out.neighbors = geom::knn(x, x, config.k, true);
    out.cloud_neighbors = out.neighbors.indices;
    return out;
  }
  const Index m = std::min(config.n_s, n);
  require(config.k < m, ErrorCode::kSize, "neighbor assignment: K must be smaller than |X_s|");
  const Eigen::RowVector3d centre = 0.5 * (x.colwise().minCoeff() + x.colwise().maxCoeff());
  Index start = 0;
  (x.rowwise() - centre).rowwise().squaredNorm().maxCoeff(&start);
  out.subsample = geom::farthest_point_sampling(x, m, start);
  const Mat xs = take_rows(x, out.subsample);
  out.representative = geom::nearest_neighbor(x, xs);
  const geom::NeighborIndex within = geom::knn(xs, xs, config.k, true);
  out.neighbors.indices.resize(n, config.k);
  out.cloud_neighbors.resize(n, config.k);
  for (Index q = 0; q < n; ++q) {
    const Index p = out.representative[static_cast<std::size_t>(q)];
    for (Index j = 0; j < config.k; ++j) {
      const Index s = within.indices(p, j);
      out.neighbors.indices(q, j) = s;
      out.cloud_neighbors(q, j) = out.subsample[static_cast<std::size_t>(s)];
    }
  }
  return out;
}

namespace {

Matrix glorot(Index fan_in, Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = uniform_real(rng, -limit, limit);
  return w;
}

void add_affine(ad::ParameterSet& p, const std::string& prefix, Index dim) {
  p.add(prefix + ".gamma", Matrix::Ones(1, dim));
  p.add(prefix + ".beta", Matrix::Zero(1, dim));
}

std::vector<Index> head_dims(const BackboneConfig& c) {
  std::vector<Index> dims{c.edgeconv_dims.back()};
  dims.insert(dims.end(), c.head_hidden.begin(), c.head_hidden.end());
  dims.push_back(c.out_dim);
  return dims;
}

const Var& param(const VarMap& params, const std::string& name) {
  const auto it = params.find(name);
  require(it != params.end(), ErrorCode::kConfig, "backbone: missing parameter '" + name + "'");
  return it->second;
}

}  // namespace

ad::ParameterSet init_backbone(const BackboneConfig& config, std::uint64_t seed) {
  config.validate();
  ad::ParameterSet p;
  p.init_seed = seed;
  std::uint64_t layer = 0;
  for (std::size_t l = 0; l + 1 < config.edgeconv_dims.size(); ++l) {
    Rng rng(derive_seed(seed, layer++));
    const Index f = config.edgeconv_dims[l], g = config.edgeconv_dims[l + 1];
    const std::string prefix = "ec" + std::to_string(l);
    p.add(prefix + ".weight", glorot(2 * f, g, rng));
    p.add(prefix + ".bias", Matrix::Zero(1, g));
    add_affine(p, prefix, g);
  }
  const std::vector<Index> dims = head_dims(config);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Rng rng(derive_seed(seed, layer++));
    const std::string prefix = "head" + std::to_string(l);
    p.add(prefix + ".weight", glorot(dims[l], dims[l + 1], rng));
    p.add(prefix + ".bias", Matrix::Zero(1, dims[l + 1]));
    if (l + 2 < dims.size()) add_affine(p, prefix, dims[l + 1]);
  }
  return p;
}

Var edgeconv_forward(Var features, const IndexMat& cloud_neighbors, const VarMap& params,
                     const std::string& prefix) {
  const Var w = param(params, prefix + ".weight");
  const Index f = features.cols();
  require(w.rows() == 2 * f, ErrorCode::kShape, "edgeconv: weight does not match feature width");
  require(cloud_neighbors.rows() == features.rows(), ErrorCode::kShape,
          "edgeconv: neighbour table does not match point count");
  // [x_i, x_j - x_i] W = x_i (W_c - W_d) + x_j W_d; leaky_relu is monotone, so
  // the max over edges can be taken before the activation.
  const Var w_centre = ad::slice_rows(w, 0, f);
  const Var w_diff = ad::slice_rows(w, f, f);
  const Var u = ad::add(ad::matmul(features, ad::sub(w_centre, w_diff)),
                        param(params, prefix + ".bias"));
  const Var v = ad::matmul(features, w_diff);
  IndexList flat;
  flat.reserve(static_cast<std::size_t>(cloud_neighbors.size()));
  for (Index i = 0; i < cloud_neighbors.rows(); ++i) {
    for (Index j = 0; j < cloud_neighbors.cols(); ++j) flat.push_back(cloud_neighbors(i, j));
  }
  const Var pooled = ad::max_over_groups(ad::gather_rows(v, flat), cloud_neighbors.cols()).value;
  const Var act = ad::leaky_relu(ad::add(u, pooled));
  return ad::add(ad::mul(act, param(params, prefix + ".gamma")), param(params, prefix + ".beta"));
}

Var backbone_forward(ad::Tape& tape, const geom::PointCloud& cloud,
                     const NeighborAssignment& assignment, const VarMap& params,
                     const BackboneConfig& config) {
  Var x = tape.constant(cloud.positions);
  for (std::size_t l = 0; l + 1 < config.edgeconv_dims.size(); ++l) {
    x = edgeconv_forward(x, assignment.cloud_neighbors, params, "ec" + std::to_string(l));
  }
  const std::vector<Index> dims = head_dims(config);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::string prefix = "head" + std::to_string(l);
    x = ad::add(ad::matmul(x, param(params, prefix + ".weight")), param(params, prefix + ".bias"));
    if (l + 2 < dims.size()) {
      x = ad::add(ad::mul(ad::leaky_relu(x), param(params, prefix + ".gamma")),
                  param(params, prefix + ".beta"));
    }
  }
  return x;
}

Mat backbone_apply(const geom::PointCloud& cloud, const ad::ParameterSet& params,
                   const BackboneConfig& config) {
  ad::Tape tape;
  const VarMap vars = params.bind(tape, false);
  const NeighborAssignment assignment = modified_neighbor_assignment(cloud, config);
  return backbone_forward(tape, cloud, assignment, vars, config).value();
}

}  // namespace nie::net
