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

#ifndef EDGECACHE_EXPERIMENT_HPP
#define EDGECACHE_EXPERIMENT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgecache/baselines.hpp"
#include "edgecache/cache.hpp"
#include "edgecache/dist.hpp"
#include "edgecache/eval.hpp"

namespace edgecache {

enum class Method { svd, nmf, dl, ddl };

std::string method_name(Method m);
Method method_from_name(const std::string& name);
std::vector<Method> parse_method_list(const std::string& csv);

// Every knob of a comparison run. Defaults follow the reference experimental
// setup where one exists (6 MENs, 2x64 hidden layers, dropout 0.8, Adam step
// 0.001, 2000 epochs, 200 MB contents, 60 Mbps backhaul, 80/20 split).
struct ExperimentConfig {
  // data source: a rating file, or the synthetic generator when path is empty
  std::string data_path;
  std::string data_format = "auto";  // auto | movielens-dat | csv
  std::size_t synth_users = 0;
  std::size_t synth_contents = 0;
  double synth_density = 0.1;
  double synth_zipf_s = 1.0;
  double split_ratio = 0.8;

  std::vector<Method> methods = {Method::svd, Method::nmf, Method::dl, Method::ddl};
  TrainConfig train;  // defaults adjusted in the constructor

  std::size_t svd_rank = 16;
  std::size_t nmf_rank = 16;
  std::size_t nmf_iters = 200;

  NetworkTopology net;
  ReplayPolicy replay_policy;
  long long content_size_bytes = 200'000'000;
  std::vector<long long> capacities = {1'000'000'000, 2'000'000'000, 4'000'000'000,
                                       8'000'000'000};
  // Centralized predictors (svd, nmf, dl) aggregate over all users, which
  // makes every MEN's cache identical; per-MEN aggregation is the alternative
  // reading. DDL always aggregates over its own shard's users.
  bool dl_global_agg = true;

  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool parallel = false;

  ExperimentConfig();

  void validate() const;

  // Flat dotted-key view mirroring the CLI flags; this is what --config files
  // contain and what run metadata records.
  std::map<std::string, std::string> to_flat() const;
  static ExperimentConfig from_flat(const std::map<std::string, std::string>& flat);
  static std::map<std::string, std::string> flat_from_json_text(const std::string& text);
};

struct ResultRow {
  std::string method;
  long long capacity_bytes = 0;
  double rmse = 0.0;
  double hit_rate = 0.0;
  double avg_delay_s = 0.0;
  long long local = 0, neighbor = 0, cs = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;                 // |methods| x |capacities|
  std::map<std::string, double> rmse_by_method;
  std::map<std::string, double> train_ms_by_method;
  std::map<std::string, TrainLog> logs;        // dl / ddl only
  std::string results_csv;                     // exact bytes of results.csv
  std::string metadata_json;
};

// Full comparison pipeline: ingest/generate -> split -> shard -> per method
// fit/predict -> RMSE -> placements per capacity -> replay -> CSV rows.
// Writes results.csv, metadata.json, shard_manifest.json, per-method train
// logs/curves/models and per-(method, capacity) placement JSONs under
// cfg.out_dir (creation skipped when out_dir is empty).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// `epoch,loss,wall_ms` rows; wall_ms is the cumulative column from the log.
void emit_learning_curve(const TrainLog& log, const std::string& path);
std::string learning_curve_csv(const TrainLog& log);

std::string results_to_csv(const std::vector<ResultRow>& rows);

// Resolves a dataset path, consulting EDGECACHE_DATA_DIR when the path does
// not exist as given. Throws ConfigError when nothing is found.
std::string resolve_data_path(const std::string& path);

}  // namespace edgecache

#endif  // EDGECACHE_EXPERIMENT_HPP
