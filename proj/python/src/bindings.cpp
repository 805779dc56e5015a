// Copyright (c) 2026, The NIE Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nie/ad/gradcheck.hpp"
#include "nie/common/error.hpp"
#include "nie/embed/nie.hpp"
#include "nie/eval/gradchecks.hpp"
#include "nie/eval/metrics.hpp"
#include "nie/fmap/fmap.hpp"
#include "nie/geom/corrupt.hpp"
#include "nie/geom/geometry.hpp"
#include "nie/geom/shapes.hpp"
#include "nie/match/nim.hpp"

namespace py = pybind11;
using namespace nie;

namespace {

geom::PointCloud to_cloud(const Mat& points) {
  geom::PointCloud c;
  c.positions = points;
  c.validate();
  return c;
}

py::dict shape_dict(const geom::Shape& s) {
  py::dict d;
  d["vertices"] = s.mesh.vertices;
  d["triangles"] = s.mesh.triangles;
  d["geodesics"] = s.geo.dist;
  return d;
}

std::vector<geom::Shape> family(const std::string& kind, Index count, double lo, double hi,
                                std::uint64_t seed) {
  if (kind == "strip") return geom::make_strip_family(count, lo, hi, {}, seed);
  if (kind == "arm") return geom::make_articulated_family(count, lo, hi, {}, seed);
  fail(ErrorCode::kConfig, "family must be 'strip' or 'arm'");
}

template <class Sample>
std::vector<Sample> samples(const std::vector<Mat>& points, const std::vector<Mat>& geodesics) {
  require(points.size() == geodesics.size(), ErrorCode::kShape, "one geodesic matrix per cloud required");
  std::vector<Sample> out;
  for (std::size_t i = 0; i < points.size(); ++i) out.push_back({to_cloud(points[i]), {geodesics[i]}});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Intrinsic embeddings, descriptor learning and functional-map matching";

  static py::exception<Error> error_type(m, "NieError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.code())) + ": " + e.what();
      PyErr_SetString(error_type.ptr(), msg.c_str());
    }
  });

  // geometry
  m.def("make_strip", [](double bend, Index nu, Index nv, double aspect) {
    return shape_dict(geom::make_strip(bend, {nu, nv, aspect}));
  }, py::arg("bend"), py::arg("nu") = 30, py::arg("nv") = 10, py::arg("aspect") = 3.0);
  m.def("make_arm", [](const std::vector<double>& angles) { return shape_dict(geom::make_arm(angles)); },
        py::arg("joint_angles"));
  m.def("make_family", [](const std::string& kind, Index count, double lo, double hi, std::uint64_t seed) {
    py::list out;
    for (const auto& s : family(kind, count, lo, hi, seed)) out.append(shape_dict(s));
    return out;
  }, py::arg("kind"), py::arg("count"), py::arg("lo"), py::arg("hi"), py::arg("seed") = 0);
  m.def("farthest_point_sampling", &geom::farthest_point_sampling, py::arg("points"), py::arg("m"),
        py::arg("seed_index") = 0);
  m.def("knn", [](const Mat& query, const Mat& reference, Index k, bool exclude_self) {
    return geom::knn(query, reference, k, exclude_self).indices;
  }, py::arg("query"), py::arg("reference"), py::arg("k"), py::arg("exclude_self") = false);
  m.def("geodesics_dijkstra", [](const Mat& vertices, const IndexMat& triangles) {
    return geom::geodesics_dijkstra(geom::TriangleMesh::create(vertices, triangles)).dist;
  }, py::arg("vertices"), py::arg("triangles"));
  m.def("knn_graph_geodesics", [](const Mat& points, Index k) { return geom::knn_graph_geodesics(points, k).dist; },
        py::arg("points"), py::arg("k") = 8);
  m.def("corrupt_hole", [](const Mat& points, Index centers, Index per_center, std::uint64_t seed) {
    return geom::corrupt_hole(to_cloud(points), centers, per_center, seed).kept;
  }, py::arg("points"), py::arg("centers"), py::arg("per_center"), py::arg("seed") = 0);
  m.def("corrupt_cut", [](const Mat& points, const Mat& geodesics, double fraction, std::uint64_t seed) {
    return geom::corrupt_cut(to_cloud(points), {geodesics}, fraction, seed).kept;
  }, py::arg("points"), py::arg("geodesics"), py::arg("fraction"), py::arg("seed") = 0);

  // functional maps
  m.def("pinv_reg", py::overload_cast<const Mat&, double>(&fmap::pinv_reg), py::arg("m"),
        py::arg("eps") = fmap::kPinvEps);
  m.def("encode_map", py::overload_cast<const fmap::PointMap&, const Mat&, const Mat&, double>(&fmap::encode_map),
        py::arg("pi"), py::arg("phi_x"), py::arg("phi_y"), py::arg("eps") = fmap::kPinvEps);
  m.def("decode_map", &fmap::decode_map, py::arg("c"), py::arg("phi_src"), py::arg("phi_tgt"));
  m.def("map_from_features", [](const Mat& phi_x, const Mat& phi_y, const Mat& g_x, const Mat& g_y) {
    const fmap::FeatureMaps f = fmap::map_from_features(phi_x, phi_y, g_x, g_y);
    return py::make_tuple(f.c, f.c_tilde);
  }, py::arg("phi_x"), py::arg("phi_y"), py::arg("g_x"), py::arg("g_y"));
  m.def("soft_correspondence",
        py::overload_cast<const Mat&, const Mat&, const fmap::FunctionalMap&, double>(&fmap::soft_correspondence),
        py::arg("phi_src"), py::arg("phi_tgt"), py::arg("c"), py::arg("alpha") = 30.0);

  // metrics
  m.def("mean_geodesic_error", [](const fmap::PointMap& pred, const fmap::PointMap& gt, const Mat& geo) {
    return eval::mean_geodesic_error(pred, gt, {geo});
  }, py::arg("pred"), py::arg("gt"), py::arg("geodesics"));
  m.def("relative_embedding_error", [](const Mat& phi, const Mat& geo) {
    return eval::relative_embedding_error(phi, {geo});
  }, py::arg("phi"), py::arg("geodesics"));
  m.def("opt_metric", [](const Mat& phi_x, const Mat& phi_y, const fmap::PointMap& gt, const Mat& geo_x) {
    return eval::opt_metric(phi_x, phi_y, gt, {geo_x});
  }, py::arg("phi_x"), py::arg("phi_y"), py::arg("gt"), py::arg("geodesics_x"));
  m.def("mds_classical", [](const Mat& geo, Index k, Index cap) {
    eval::MdsResult r = eval::mds_classical({geo}, k, cap);
    return py::make_tuple(r.embedding, r.points, r.warnings);
  }, py::arg("geodesics"), py::arg("k"), py::arg("cap") = 1500);
  m.def("euclidean_baseline", [](const Mat& points) { return eval::euclidean_baseline(to_cloud(points)); },
        py::arg("points"));
  m.def("landmark_segmentation", &eval::landmark_segmentation, py::arg("phi"), py::arg("landmarks"));
  m.def("rank_ratio", &rank_ratio, py::arg("m"));

  // models
  py::class_<net::BackboneConfig>(m, "BackboneConfig")
      .def(py::init<>())
      .def_readwrite("edgeconv_dims", &net::BackboneConfig::edgeconv_dims)
      .def_readwrite("head_hidden", &net::BackboneConfig::head_hidden)
      .def_readwrite("out_dim", &net::BackboneConfig::out_dim)
      .def_readwrite("k", &net::BackboneConfig::k)
      .def_readwrite("n_s", &net::BackboneConfig::n_s)
      .def_readwrite("modified_sampling", &net::BackboneConfig::modified_sampling)
      .def("describe", &net::BackboneConfig::describe)
      .def("__repr__", [](const net::BackboneConfig& c) { return "BackboneConfig(" + c.describe() + ")"; });

  py::class_<embed::NieTrainConfig>(m, "NieTrainConfig")
      .def(py::init<>())
      .def_property("lambdas",
                    [](const embed::NieTrainConfig& c) {
                      return py::make_tuple(c.weights.lambda1, c.weights.lambda2, c.weights.lambda3);
                    },
                    [](embed::NieTrainConfig& c, const std::tuple<double, double, double>& w) {
                      c.weights = {std::get<0>(w), std::get<1>(w), std::get<2>(w)};
                    })
      .def_readwrite("alpha_kl", &embed::NieTrainConfig::alpha_kl)
      .def_readwrite("epochs", &embed::NieTrainConfig::epochs)
      .def_readwrite("batch_size", &embed::NieTrainConfig::batch_size)
      .def_readwrite("lr_max", &embed::NieTrainConfig::lr_max)
      .def_readwrite("lr_min", &embed::NieTrainConfig::lr_min)
      .def_readwrite("pair_count", &embed::NieTrainConfig::pair_count)
      .def_readwrite("kl_sources", &embed::NieTrainConfig::kl_sources)
      .def_readwrite("bijectivity_m", &embed::NieTrainConfig::bijectivity_m)
      .def_readwrite("sample_points", &embed::NieTrainConfig::sample_points)
      .def_readwrite("absolute_geodesic", &embed::NieTrainConfig::absolute_geodesic)
      .def_readwrite("seed", &embed::NieTrainConfig::seed)
      .def("describe", &embed::NieTrainConfig::describe);

  py::class_<match::NimTrainConfig>(m, "NimTrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &match::NimTrainConfig::epochs)
      .def_readwrite("batch_size", &match::NimTrainConfig::batch_size)
      .def_readwrite("lr_max", &match::NimTrainConfig::lr_max)
      .def_readwrite("lr_min", &match::NimTrainConfig::lr_min)
      .def_readwrite("alpha", &match::NimTrainConfig::alpha)
      .def_readwrite("loss_points", &match::NimTrainConfig::loss_points)
      .def_readwrite("fine_tune_nie", &match::NimTrainConfig::fine_tune_nie)
      .def_readwrite("seed", &match::NimTrainConfig::seed)
      .def("describe", &match::NimTrainConfig::describe);

  py::class_<embed::NieModel>(m, "NieModel")
      .def_readonly("backbone", &embed::NieModel::backbone)
      .def_readonly("reference_diagonal", &embed::NieModel::reference_diagonal)
      .def_readonly("step", &embed::NieModel::step)
      .def("embed", [](const embed::NieModel& model, const Mat& points) { return embed::embed(model, to_cloud(points)); },
           py::arg("points"))
      .def("embed_raw", [](const embed::NieModel& model, const Mat& points) {
        return embed::embed_raw(model, to_cloud(points));
      }, py::arg("points"))
      .def("save", [](const embed::NieModel& model, const std::filesystem::path& base) {
        ad::save_checkpoint(base, embed::to_checkpoint(model, ""));
      }, py::arg("base"))
      .def_static("load", [](const std::filesystem::path& base) {
        return embed::nie_from_checkpoint(ad::load_checkpoint(base));
      }, py::arg("base"));

  py::class_<match::NimModel>(m, "NimModel")
      .def_readonly("backbone", &match::NimModel::backbone)
      .def_readonly("step", &match::NimModel::step)
      .def("describe", [](const match::NimModel& model, const Mat& points) {
        return match::describe(model, to_cloud(points));
      }, py::arg("points"))
      .def("save", [](const match::NimModel& model, const std::filesystem::path& base) {
        ad::save_checkpoint(base, match::to_checkpoint(model, ""));
      }, py::arg("base"))
      .def_static("load", [](const std::filesystem::path& base) {
        return match::nim_from_checkpoint(ad::load_checkpoint(base));
      }, py::arg("base"));

  m.def("train_nie", [](const std::vector<Mat>& points, const std::vector<Mat>& geodesics,
                        const net::BackboneConfig& backbone, const embed::NieTrainConfig& config) {
    const auto data = samples<embed::NieSample>(points, geodesics);
    std::vector<embed::EpochLog> log;
    embed::NieModel model;
    {
      py::gil_scoped_release release;
      model = embed::train_nie(data, backbone, config, &log);
    }
    std::vector<std::string> lines;
    for (const auto& e : log) lines.push_back(e.format());
    return py::make_tuple(model, lines);
  }, py::arg("points"), py::arg("geodesics"), py::arg("backbone"), py::arg("config"));

  m.def("train_nim", [](const std::vector<Mat>& points, const std::vector<Mat>& geodesics, embed::NieModel& nie,
                        const net::BackboneConfig& backbone, const match::NimTrainConfig& config) {
    const auto data = samples<match::NimSample>(points, geodesics);
    std::vector<match::NimEpochLog> log;
    match::NimModel model;
    {
      py::gil_scoped_release release;
      model = match::train_nim(data, nie, backbone, config, &log);
    }
    std::vector<std::string> lines;
    for (const auto& e : log) lines.push_back(e.format());
    return py::make_tuple(model, lines);
  }, py::arg("points"), py::arg("geodesics"), py::arg("nie"), py::arg("backbone"), py::arg("config"));

  m.def("infer_map", [](const Mat& x, const Mat& y, const embed::NieModel& nie, const match::NimModel& nim,
                        double alpha) {
    const match::InferredMap r = match::infer_map(to_cloud(x), to_cloud(y), nie, nim, alpha);
    py::dict d;
    d["x_to_y"] = r.x_to_y;
    d["y_to_x"] = r.y_to_x;
    d["c"] = r.c;
    d["c_tilde"] = r.c_tilde;
    d["entropy_xy"] = r.entropy_xy;
    d["entropy_yx"] = r.entropy_yx;
    d["warnings"] = r.warnings;
    return d;
  }, py::arg("x"), py::arg("y"), py::arg("nie"), py::arg("nim"), py::arg("alpha") = 30.0);

  m.def("approx_geodesics", [](const Mat& points, const embed::NieModel& nie) {
    return match::approx_geodesics(to_cloud(points), nie).dist;
  }, py::arg("points"), py::arg("nie"));

  m.def("gradcheck", [](std::uint64_t seed) {
    auto results = ad::check_ops(seed);
    for (auto& r : eval::loss_gradchecks(seed)) results.push_back(r);
    py::list out;
    for (const auto& r : results) out.append(py::make_tuple(r.name, r.rel_error, r.pass));
    return out;
  }, py::arg("seed") = 0);
}
