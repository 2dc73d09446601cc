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

#include <doctest.h>

#include <sstream>

#include "edgecache/experiment.hpp"

using namespace edgecache;

namespace {

// Tiny smoke configuration: fast to run, still exercises all four methods.
ExperimentConfig smoke_config() {
  ExperimentConfig cfg;
  cfg.synth_users = 50;
  cfg.synth_contents = 40;
  cfg.synth_density = 0.25;
  cfg.train.mens = 2;
  cfg.net.mens = 2;
  cfg.train.batch = 20;
  cfg.train.epochs = 5;
  cfg.train.hidden_dims = {8, 8};
  cfg.train.dropout.rate = 0.2;
  cfg.train.adam.mode = AdamMode::standard;
  cfg.train.patience = 0;
  cfg.svd_rank = 4;
  cfg.nmf_rank = 4;
  cfg.nmf_iters = 40;
  cfg.capacities = {400'000'000, 2'000'000'000};
  cfg.out_dir.clear();  // no files from unit tests
  cfg.seed = 2024;
  return cfg;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("missing data source is a config error") {
  ExperimentConfig cfg;
  cfg.out_dir.clear();
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("smoke run emits one row per method and capacity") {
  const ExperimentConfig cfg = smoke_config();
  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.rows.size() == cfg.methods.size() * cfg.capacities.size());

  // header + rows
  std::istringstream csv(result.results_csv);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "method,capacity_bytes,rmse,hit_rate,avg_delay_s,local,neighbor,cs");
  std::size_t rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == result.rows.size());

  for (const auto& row : result.rows) {
    CHECK(row.rmse > 0.0);
    CHECK(row.hit_rate >= 0.0);
    CHECK(row.hit_rate <= 1.0);
    CHECK(row.local + row.neighbor + row.cs ==
          static_cast<long long>(result.rows.front().local + result.rows.front().neighbor +
                                 result.rows.front().cs));
  }
}

TEST_CASE("same config and seed give byte-identical metric csv") {
  const ExperimentConfig cfg = smoke_config();
  const ExperimentResult a = run_experiment(cfg);
  const ExperimentResult b = run_experiment(cfg);
  CHECK(a.results_csv == b.results_csv);

  // ... and the parallel flag must not change the bytes either
  ExperimentConfig par = cfg;
  par.parallel = true;
  const ExperimentResult c = run_experiment(par);
  CHECK(c.results_csv == a.results_csv);
}

TEST_CASE("run is reproducible from its metadata alone") {
  ExperimentConfig cfg = smoke_config();
  cfg.methods = {Method::svd, Method::nmf};
  const ExperimentResult first = run_experiment(cfg);

  const auto flat = ExperimentConfig::flat_from_json_text(first.metadata_json);
  const ExperimentConfig rebuilt = ExperimentConfig::from_flat(flat);
  const ExperimentResult second = run_experiment(rebuilt);
  CHECK(second.results_csv == first.results_csv);
}

TEST_CASE("flat config round-trips and rejects unknown keys") {
  const ExperimentConfig cfg = smoke_config();
  const auto flat = cfg.to_flat();
  const ExperimentConfig back = ExperimentConfig::from_flat(flat);
  CHECK(back.to_flat() == flat);

  std::map<std::string, std::string> bad{{"train.epohcs", "2"}};
  CHECK_THROWS_AS(ExperimentConfig::from_flat(bad), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::flat_from_json_text("not json"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::flat_from_json_text("[1,2]"), ConfigError);
}

TEST_CASE("learning curve emission") {
  TrainLog log;
  log.epochs = {{1, 0.5, 10.0, 3}, {2, 0.4, 20.0, 3}, {3, 0.35, 31.5, 3}};
  const std::string csv = learning_curve_csv(log);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,loss,wall_ms");
  std::size_t rows = 0;
  double prev_wall = -1.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    const auto last_comma = line.rfind(',');
    const double wall = std::stod(line.substr(last_comma + 1));
    CHECK(wall >= prev_wall);  // cumulative column
    prev_wall = wall;
  }
  CHECK(rows == 3);

  CHECK_THROWS_AS(learning_curve_csv(TrainLog{}), DataError);
}

TEST_CASE("diverged training names the method") {
  ExperimentConfig cfg = smoke_config();
  cfg.methods = {Method::dl};
  cfg.train.adam.step = 1e18;  // blow up on purpose
  cfg.train.epochs = 50;
  try {
    run_experiment(cfg);
    // Some runs survive by relu dying to all-zero outputs; only a thrown
    // DivergedError is required to carry the method name.
  } catch (const DivergedError& e) {
    CHECK(std::string(e.what()).find("method dl") != std::string::npos);
  }
}

TEST_CASE("ddl plans differ per men while centralized plans agree") {
  ExperimentConfig cfg = smoke_config();
  cfg.methods = {Method::svd, Method::ddl};
  cfg.train.epochs = 3;
  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.rows.size() == 4);
  // svd rows exist with the global-aggregation default (identical caches →
  // neighbor fetches cannot help)
  for (const auto& row : result.rows)
    if (row.method == "svd") CHECK(row.neighbor == 0);
}

}  // TEST_SUITE
