/*
 * Copyright 2026 the edgecache authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include "edgecache/baselines.hpp"
#include "edgecache/cache.hpp"
#include "edgecache/dist.hpp"
#include "edgecache/eval.hpp"
#include "edgecache/experiment.hpp"

namespace py = pybind11;
using namespace edgecache;

namespace {

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  std::vector<double> data(a.data(), a.data() + rows * cols);
  return Matrix(rows, cols, std::move(data));
}

TrainConfig config_from_kwargs(Topology topology, int mens, std::size_t batch, long epochs,
                               double dropout, std::vector<std::size_t> hidden, double adam_step,
                               const std::string& adam_mode, std::uint64_t seed, double tol,
                               int patience, bool zero_fill) {
  TrainConfig cfg;
  cfg.topology = topology;
  cfg.mens = mens;
  cfg.batch = batch;
  cfg.epochs = epochs;
  cfg.dropout.rate = dropout;
  cfg.hidden_dims = std::move(hidden);
  cfg.adam.step = adam_step;
  if (adam_mode != "paper" && adam_mode != "standard")
    throw ConfigError("adam_mode must be paper|standard");
  cfg.adam.mode = adam_mode == "paper" ? AdamMode::paper : AdamMode::standard;
  cfg.seed = seed;
  cfg.tol = tol;
  cfg.patience = patience;
  cfg.zero_fill_loss = zero_fill;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_edgecache, m) {
  m.doc() = "demand prediction, top-R placement and replay simulation for edge caches";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<ShapeError>(m, "ShapeError");
  py::register_exception<ContractError>(m, "ContractError");

  py::class_<RatingEvent>(m, "RatingEvent")
      .def(py::init<>())
      .def(py::init([](long user, long content, double rating, long ts) {
             return RatingEvent{user, content, rating, ts};
           }),
           py::arg("user_id"), py::arg("content_id"), py::arg("rating"),
           py::arg("timestamp") = 0)
      .def_readwrite("user_id", &RatingEvent::user_id)
      .def_readwrite("content_id", &RatingEvent::content_id)
      .def_readwrite("rating", &RatingEvent::rating)
      .def_readwrite("timestamp", &RatingEvent::timestamp)
      .def("__repr__", [](const RatingEvent& e) {
        return "RatingEvent(" + std::to_string(e.user_id) + ", " + std::to_string(e.content_id) +
               ", " + std::to_string(e.rating) + ")";
      });

  py::class_<RatingMatrix>(m, "RatingMatrix")
      .def_static("from_events", &RatingMatrix::from_events)
      .def_property_readonly("user_count", &RatingMatrix::user_count)
      .def_property_readonly("content_count", &RatingMatrix::content_count)
      .def_property_readonly("observed_count", &RatingMatrix::observed_count)
      .def_property_readonly("user_ids", &RatingMatrix::user_ids)
      .def_property_readonly("content_ids", &RatingMatrix::content_ids)
      .def("dense", [](const RatingMatrix& x) { return to_array(x.dense()); })
      .def("dense_mask", [](const RatingMatrix& x) { return to_array(x.dense_mask()); })
      .def("scaled", &RatingMatrix::scaled)
      .def("__eq__", [](const RatingMatrix& a, const RatingMatrix& b) { return a == b; });

  py::class_<ShardManifest>(m, "ShardManifest")
      .def_property_readonly("users_of_men",
                             [](const ShardManifest& s) { return s.users_of_men; })
      .def("men_of_user", &ShardManifest::men_of_user)
      .def("to_json", &ShardManifest::to_json)
      .def_static("from_json", &ShardManifest::from_json);

  py::enum_<Topology>(m, "Topology").value("dl", Topology::dl).value("ddl", Topology::ddl);

  py::class_<ModelParams>(m, "ModelParams")
      .def_property_readonly("layer_count", &ModelParams::layer_count)
      .def("to_json", [](const ModelParams& p) { return model_to_json(p); })
      .def_static("from_json", &model_from_json)
      .def("__eq__",
           [](const ModelParams& a, const ModelParams& b) { return a.bit_equal(b); });

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("epoch", &EpochStats::epoch)
      .def_readonly("loss", &EpochStats::loss)
      .def_readonly("wall_ms", &EpochStats::wall_ms)
      .def_readonly("round_count", &EpochStats::round_count);

  py::class_<TrainLog>(m, "TrainLog")
      .def_readonly("epochs", &TrainLog::epochs)
      .def("to_csv", &TrainLog::to_csv);

  m.def("synth_zipf", &synth_zipf, py::arg("users"), py::arg("contents"), py::arg("density"),
        py::arg("zipf_exponent"), py::arg("seed"),
        "synthetic rating workload with rank^-s content popularity");

  m.def(
      "ingest",
      [](const std::string& path, const std::string& format) {
        DataFormat f = format == "movielens-dat" ? DataFormat::movielens_dat : DataFormat::csv;
        return ingest(path, f);
      },
      py::arg("path"), py::arg("format") = "csv");

  m.def(
      "split",
      [](const std::vector<RatingEvent>& events, double ratio, std::uint64_t seed) {
        SplitPair pair = split(events, ratio, seed);
        return py::make_tuple(pair.train, pair.test);
      },
      py::arg("events"), py::arg("ratio") = 0.8, py::arg("seed") = 0,
      "per-user stratified train/test split");

  m.def("shard", &shard, py::arg("matrix"), py::arg("mens"), py::arg("seed") = 0,
        "partition users into equal shards; returns (shards, manifest)");

  m.def(
      "train_centralized",
      [](const RatingMatrix& data, int mens, std::size_t batch, long epochs, double dropout,
         std::vector<std::size_t> hidden, double adam_step, const std::string& adam_mode,
         std::uint64_t seed, double tol, int patience, bool zero_fill) {
        TrainConfig cfg =
            config_from_kwargs(Topology::dl, mens, batch, epochs, dropout, std::move(hidden),
                               adam_step, adam_mode, seed, tol, patience, zero_fill);
        TrainResult r = run_centralized(data, cfg);
        return py::make_tuple(r.params, r.log);
      },
      py::arg("data"), py::arg("mens") = 1, py::arg("batch") = 32, py::arg("epochs") = 100,
      py::arg("dropout") = 0.0, py::arg("hidden") = std::vector<std::size_t>{64, 64},
      py::arg("adam_step") = 1e-3, py::arg("adam_mode") = "standard", py::arg("seed") = 0,
      py::arg("tol") = 1e-6, py::arg("patience") = 10, py::arg("zero_fill") = false);

  m.def(
      "train_distributed",
      [](const std::vector<RatingMatrix>& shards, int mens, std::size_t batch, long epochs,
         double dropout, std::vector<std::size_t> hidden, double adam_step,
         const std::string& adam_mode, std::uint64_t seed, double tol, int patience,
         bool zero_fill) {
        TrainConfig cfg =
            config_from_kwargs(Topology::ddl, mens, batch, epochs, dropout, std::move(hidden),
                               adam_step, adam_mode, seed, tol, patience, zero_fill);
        TrainResult r = run_distributed(shards, cfg);
        return py::make_tuple(r.params, r.log);
      },
      py::arg("shards"), py::arg("mens"), py::arg("batch") = 32, py::arg("epochs") = 100,
      py::arg("dropout") = 0.0, py::arg("hidden") = std::vector<std::size_t>{64, 64},
      py::arg("adam_step") = 1e-3, py::arg("adam_mode") = "standard", py::arg("seed") = 0,
      py::arg("tol") = 1e-6, py::arg("patience") = 10, py::arg("zero_fill") = false);

  m.def(
      "predict",
      [](const ModelParams& params, const RatingMatrix& data) {
        return to_array(predict(params, data));
      },
      py::arg("model"), py::arg("data"), "reconstruct every user row under the model");

  m.def(
      "svd_predict",
      [](const RatingMatrix& x, std::size_t k) { return to_array(svd_predict(x, k)); },
      py::arg("matrix"), py::arg("rank"));

  m.def(
      "nmf_predict",
      [](const RatingMatrix& x, std::size_t k, std::size_t iters, std::uint64_t seed) {
        return to_array(nmf_predict(x, k, iters, seed));
      },
      py::arg("matrix"), py::arg("rank"), py::arg("iters") = 200, py::arg("seed") = 0);

  m.def(
      "rmse",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& pred,
         const RatingMatrix& test) { return rmse(to_matrix(pred), test); },
      py::arg("pred"), py::arg("test"));

  py::class_<ContentCatalog>(m, "ContentCatalog")
      .def(py::init([](std::vector<long> ids, long long size) {
             return ContentCatalog{std::move(ids), size};
           }),
           py::arg("content_ids"), py::arg("content_size_bytes") = 200'000'000)
      .def_readwrite("content_ids", &ContentCatalog::content_ids)
      .def_readwrite("content_size_bytes", &ContentCatalog::content_size_bytes);

  py::class_<MenPlacement>(m, "MenPlacement")
      .def_readonly("men_id", &MenPlacement::men_id)
      .def_readonly("capacity_bytes", &MenPlacement::capacity_bytes)
      .def_readonly("contents", &MenPlacement::contents);

  py::class_<PlacementPlan>(m, "PlacementPlan")
      .def(py::init<>())
      .def_readwrite("mens", &PlacementPlan::mens)
      .def("to_json", &PlacementPlan::to_json)
      .def_static("from_json", &PlacementPlan::from_json);

  m.def(
      "aggregate_popularity",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& pred,
         const std::vector<std::size_t>& rows) {
        return aggregate_popularity(to_matrix(pred), rows);
      },
      py::arg("pred"), py::arg("user_rows"));

  m.def("place_top_r", &place_top_r, py::arg("scores"), py::arg("catalog"), py::arg("men_id"),
        py::arg("capacity_bytes"));

  py::class_<NetworkTopology>(m, "NetworkTopology")
      .def(py::init([](int mens, double bw_cs, double bw_men, double bw_user) {
             NetworkTopology t;
             t.mens = mens;
             t.bw_cs_bps = bw_cs;
             t.bw_men_bps = bw_men;
             t.bw_user_bps = bw_user;
             return t;
           }),
           py::arg("mens"), py::arg("bw_cs_bps") = 60e6, py::arg("bw_men_bps") = 100e6,
           py::arg("bw_user_bps") = 100e6)
      .def_readwrite("mens", &NetworkTopology::mens)
      .def_readwrite("bw_cs_bps", &NetworkTopology::bw_cs_bps)
      .def_readwrite("bw_men_bps", &NetworkTopology::bw_men_bps)
      .def_readwrite("bw_user_bps", &NetworkTopology::bw_user_bps);

  py::class_<Request>(m, "Request")
      .def(py::init([](long user, long content, int men) {
             return Request{user, content, men};
           }),
           py::arg("user_id"), py::arg("content_id"), py::arg("home_men"))
      .def_readonly("user_id", &Request::user_id)
      .def_readonly("content_id", &Request::content_id)
      .def_readonly("home_men", &Request::home_men);

  py::class_<ReplayResult>(m, "ReplayResult")
      .def_readonly("requests", &ReplayResult::requests)
      .def_readonly("local_hits", &ReplayResult::local_hits)
      .def_readonly("neighbor_hits", &ReplayResult::neighbor_hits)
      .def_readonly("cs_fetches", &ReplayResult::cs_fetches)
      .def_readonly("hit_rate", &ReplayResult::hit_rate)
      .def_readonly("avg_delay_s", &ReplayResult::avg_delay_s);

  m.def("build_request_trace", &build_request_trace, py::arg("test"), py::arg("manifest"));

  m.def(
      "replay",
      [](const PlacementPlan& plan, const NetworkTopology& topo,
         const std::vector<Request>& requests, const ContentCatalog& catalog,
         bool count_neighbor_hits, bool zero_local_delay) {
        return replay(plan, topo, {count_neighbor_hits, zero_local_delay}, requests, catalog);
      },
      py::arg("plan"), py::arg("topology"), py::arg("requests"), py::arg("catalog"),
      py::arg("count_neighbor_hits") = false, py::arg("zero_local_delay") = false);

#ifdef VERSION_INFO
#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
