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

#include "edgecache/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace edgecache {

namespace fs = std::filesystem;

std::string method_name(Method m) {
  switch (m) {
    case Method::svd: return "svd";
    case Method::nmf: return "nmf";
    case Method::dl: return "dl";
    case Method::ddl: return "ddl";
  }
  throw ContractError("method_name: bad enum value");
}

Method method_from_name(const std::string& name) {
  if (name == "svd") return Method::svd;
  if (name == "nmf") return Method::nmf;
  if (name == "dl") return Method::dl;
  if (name == "ddl") return Method::ddl;
  throw ConfigError("unknown method '" + name + "' (expected svd|nmf|dl|ddl)");
}

std::vector<Method> parse_method_list(const std::string& csv) {
  std::vector<Method> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(method_from_name(item));
  }
  if (out.empty()) throw ConfigError("empty method list");
  return out;
}

ExperimentConfig::ExperimentConfig() {
  train.mens = 6;
  train.batch = 60;
  train.epochs = 2000;
  net.mens = 6;
}

void ExperimentConfig::validate() const {
  if (data_path.empty() && (synth_users == 0 || synth_contents == 0))
    throw ConfigError("no data source: give a dataset path or synth users/contents");
  if (split_ratio <= 0.0 || split_ratio >= 1.0)
    throw ConfigError("split ratio must be in (0,1)");
  if (methods.empty()) throw ConfigError("no methods selected");
  if (capacities.empty()) throw ConfigError("capacity list is empty");
  if (content_size_bytes <= 0) throw ConfigError("content size must be > 0");
  if (svd_rank < 1 || nmf_rank < 1) throw ConfigError("baseline ranks must be >= 1");
  train.validate();
  net.validate();
  if (net.mens != train.mens)
    throw ConfigError("net.mens and train.mens disagree (" + std::to_string(net.mens) + " vs " +
                      std::to_string(train.mens) + ")");
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string join_longs(const std::vector<long long>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

std::vector<long long> parse_longs(const std::string& csv) {
  std::vector<long long> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoll(item));
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(static_cast<std::size_t>(std::stoull(item)));
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("expected boolean, got '" + s + "'");
}

}  // namespace

std::map<std::string, std::string> ExperimentConfig::to_flat() const {
  std::map<std::string, std::string> f;
  f["data.path"] = data_path;
  f["data.format"] = data_format;
  f["synth.users"] = std::to_string(synth_users);
  f["synth.contents"] = std::to_string(synth_contents);
  f["synth.density"] = fmt_double(synth_density);
  f["synth.zipf_s"] = fmt_double(synth_zipf_s);
  f["split.ratio"] = fmt_double(split_ratio);
  {
    std::string ms;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      if (i) ms += ",";
      ms += method_name(methods[i]);
    }
    f["methods"] = ms;
  }
  f["train.mens"] = std::to_string(train.mens);
  f["train.batch"] = std::to_string(train.batch);
  f["train.epochs"] = std::to_string(train.epochs);
  f["train.tol"] = fmt_double(train.tol);
  f["train.patience"] = std::to_string(train.patience);
  f["train.dropout"] = fmt_double(train.dropout.rate);
  f["train.dropout_after"] = std::to_string(train.dropout.after_layer);
  f["train.dropout_keep"] = train.dropout_rate_is_keep ? "true" : "false";
  f["train.hidden"] = join_sizes(train.hidden_dims);
  f["train.output_activation"] =
      train.output_activation == Activation::relu ? "relu" : "linear";
  f["train.zero_fill"] = train.zero_fill_loss ? "true" : "false";
  f["train.adam_mode"] = train.adam.mode == AdamMode::paper ? "paper" : "standard";
  f["train.adam_step"] = fmt_double(train.adam.step);
  f["train.adam_decay_mean"] = fmt_double(train.adam.decay_mean);
  f["train.adam_decay_var"] = fmt_double(train.adam.decay_var);
  f["train.adam_epsilon"] = fmt_double(train.adam.epsilon);
  f["train.weighted_average"] = train.weighted_average ? "true" : "false";
  f["baselines.svd_rank"] = std::to_string(svd_rank);
  f["baselines.nmf_rank"] = std::to_string(nmf_rank);
  f["baselines.nmf_iters"] = std::to_string(nmf_iters);
  f["net.bw_cs_bps"] = fmt_double(net.bw_cs_bps);
  f["net.bw_men_bps"] = fmt_double(net.bw_men_bps);
  f["net.bw_user_bps"] = fmt_double(net.bw_user_bps);
  f["cache.content_size_bytes"] = std::to_string(content_size_bytes);
  f["cache.capacities"] = join_longs(capacities);
  f["cache.dl_global_agg"] = dl_global_agg ? "true" : "false";
  f["replay.count_neighbor_hits"] = replay_policy.count_neighbor_hits ? "true" : "false";
  f["replay.zero_local_delay"] = replay_policy.zero_local_delay ? "true" : "false";
  f["out.dir"] = out_dir;
  f["seed"] = std::to_string(seed);
  f["parallel"] = parallel ? "true" : "false";
  return f;
}

ExperimentConfig ExperimentConfig::from_flat(const std::map<std::string, std::string>& flat) {
  ExperimentConfig cfg;
  auto defaults = cfg.to_flat();
  for (const auto& [key, value] : flat)
    if (defaults.find(key) == defaults.end())
      throw ConfigError("unknown config key '" + key + "'");

  auto get = [&](const char* key) -> const std::string& {
    auto it = flat.find(key);
    return it != flat.end() ? it->second : defaults.at(key);
  };

  try {
    cfg.data_path = get("data.path");
    cfg.data_format = get("data.format");
    cfg.synth_users = static_cast<std::size_t>(std::stoull(get("synth.users")));
    cfg.synth_contents = static_cast<std::size_t>(std::stoull(get("synth.contents")));
    cfg.synth_density = std::stod(get("synth.density"));
    cfg.synth_zipf_s = std::stod(get("synth.zipf_s"));
    cfg.split_ratio = std::stod(get("split.ratio"));
    cfg.methods = parse_method_list(get("methods"));
    cfg.train.mens = std::stoi(get("train.mens"));
    cfg.train.batch = static_cast<std::size_t>(std::stoull(get("train.batch")));
    cfg.train.epochs = std::stol(get("train.epochs"));
    cfg.train.tol = std::stod(get("train.tol"));
    cfg.train.patience = std::stoi(get("train.patience"));
    cfg.train.dropout.rate = std::stod(get("train.dropout"));
    cfg.train.dropout.after_layer =
        static_cast<std::size_t>(std::stoull(get("train.dropout_after")));
    cfg.train.dropout_rate_is_keep = parse_bool(get("train.dropout_keep"));
    cfg.train.hidden_dims = parse_sizes(get("train.hidden"));
    const std::string act = get("train.output_activation");
    if (act != "relu" && act != "linear")
      throw ConfigError("train.output_activation must be relu|linear");
    cfg.train.output_activation = act == "relu" ? Activation::relu : Activation::linear;
    cfg.train.zero_fill_loss = parse_bool(get("train.zero_fill"));
    const std::string mode = get("train.adam_mode");
    if (mode != "paper" && mode != "standard")
      throw ConfigError("train.adam_mode must be paper|standard");
    cfg.train.adam.mode = mode == "paper" ? AdamMode::paper : AdamMode::standard;
    cfg.train.adam.step = std::stod(get("train.adam_step"));
    cfg.train.adam.decay_mean = std::stod(get("train.adam_decay_mean"));
    cfg.train.adam.decay_var = std::stod(get("train.adam_decay_var"));
    cfg.train.adam.epsilon = std::stod(get("train.adam_epsilon"));
    cfg.train.weighted_average = parse_bool(get("train.weighted_average"));
    cfg.svd_rank = static_cast<std::size_t>(std::stoull(get("baselines.svd_rank")));
    cfg.nmf_rank = static_cast<std::size_t>(std::stoull(get("baselines.nmf_rank")));
    cfg.nmf_iters = static_cast<std::size_t>(std::stoull(get("baselines.nmf_iters")));
    cfg.net.bw_cs_bps = std::stod(get("net.bw_cs_bps"));
    cfg.net.bw_men_bps = std::stod(get("net.bw_men_bps"));
    cfg.net.bw_user_bps = std::stod(get("net.bw_user_bps"));
    cfg.content_size_bytes = std::stoll(get("cache.content_size_bytes"));
    cfg.capacities = parse_longs(get("cache.capacities"));
    cfg.dl_global_agg = parse_bool(get("cache.dl_global_agg"));
    cfg.replay_policy.count_neighbor_hits = parse_bool(get("replay.count_neighbor_hits"));
    cfg.replay_policy.zero_local_delay = parse_bool(get("replay.zero_local_delay"));
    cfg.out_dir = get("out.dir");
    cfg.seed = std::stoull(get("seed"));
    cfg.parallel = parse_bool(get("parallel"));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  cfg.net.mens = cfg.train.mens;
  return cfg;
}

std::map<std::string, std::string> ExperimentConfig::flat_from_json_text(
    const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  // Accept either a flat object or a metadata.json with a "config" section,
  // so a finished run's metadata reproduces the run directly.
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.is_object()) throw ConfigError("config JSON must be an object of dotted keys");
  std::map<std::string, std::string> flat;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& v = it.value();
    if (v.is_string())
      flat[it.key()] = v.get<std::string>();
    else if (v.is_boolean())
      flat[it.key()] = v.get<bool>() ? "true" : "false";
    else if (v.is_number_integer())
      flat[it.key()] = std::to_string(v.get<long long>());
    else if (v.is_number_unsigned())
      flat[it.key()] = std::to_string(v.get<unsigned long long>());
    else if (v.is_number_float())
      flat[it.key()] = fmt_double(v.get<double>());
    else
      throw ConfigError("config key '" + it.key() + "' has an unsupported value type");
  }
  return flat;
}

std::string resolve_data_path(const std::string& path) {
  if (path.empty()) throw ConfigError("empty dataset path");
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("EDGECACHE_DATA_DIR")) {
    const fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  throw ConfigError("dataset not found: " + path +
                    " (also tried $EDGECACHE_DATA_DIR); run `edgecache fetch` or pass synth "
                    "parameters");
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = "method,capacity_bytes,rmse,hit_rate,avg_delay_s,local,neighbor,cs\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%s,%lld,%.10g,%.10g,%.10g,%lld,%lld,%lld\n",
                  r.method.c_str(), r.capacity_bytes, r.rmse, r.hit_rate, r.avg_delay_s, r.local,
                  r.neighbor, r.cs);
    out += line;
  }
  return out;
}

std::string learning_curve_csv(const TrainLog& log) {
  if (log.empty()) throw DataError("learning curve: empty training log");
  std::string out = "epoch,loss,wall_ms\n";
  char line[96];
  for (const auto& e : log.epochs) {
    std::snprintf(line, sizeof(line), "%ld,%.12g,%.3f\n", e.epoch, e.loss, e.wall_ms);
    out += line;
  }
  return out;
}

void emit_learning_curve(const TrainLog& log, const std::string& path) {
  const std::string csv = learning_curve_csv(log);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write learning curve: " + path);
  out << csv;
}

namespace {

struct MethodOutcome {
  Matrix prediction;  // rating units, rows aligned to the train matrix
  double rmse_value = 0.0;
  double train_ms = 0.0;
  TrainLog log;        // dl/ddl only
  std::string model_json;  // dl/ddl only
};

struct PreparedData {
  RatingMatrix train;
  RatingMatrix test;
  std::vector<RatingMatrix> shards_scaled;
  ShardManifest manifest;
  RatingMatrix train_scaled;
  double scale = 1.0;
  std::vector<Request> trace;
  ContentCatalog catalog;
};

std::uint64_t method_seed(const ExperimentConfig& cfg, Method m) {
  return RngStream(cfg.seed)
      .fork(fork_tag(stream_kind::method, static_cast<std::uint64_t>(m)))
      .seed();
}

MethodOutcome run_method(Method m, const ExperimentConfig& cfg, const PreparedData& data) {
  MethodOutcome out;
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = method_seed(cfg, m);
  try {
    switch (m) {
      case Method::svd:
        out.prediction = svd_predict(data.train, cfg.svd_rank);
        break;
      case Method::nmf:
        out.prediction = nmf_predict(data.train, cfg.nmf_rank, cfg.nmf_iters, seed);
        break;
      case Method::dl: {
        TrainConfig tc = cfg.train;
        tc.topology = Topology::dl;
        tc.seed = seed;
        TrainResult r = run_centralized(data.train_scaled, tc);
        out.prediction = scale(predict(r.params, data.train_scaled), data.scale);
        out.log = std::move(r.log);
        out.model_json = model_to_json(r.params);
        break;
      }
      case Method::ddl: {
        TrainConfig tc = cfg.train;
        tc.topology = Topology::ddl;
        tc.seed = seed;
        TrainResult r = run_distributed(data.shards_scaled, tc);
        // Each MEN reconstructs its own users under the final global model;
        // rows are reassembled into the full user indexing.
        Matrix full(data.train.user_count(), data.train.content_count());
        for (const auto& shard_matrix : data.shards_scaled) {
          const Matrix local = predict(r.params, shard_matrix);
          for (std::size_t row = 0; row < shard_matrix.user_count(); ++row) {
            const std::size_t full_row = data.train.user_row(shard_matrix.user_at(row));
            for (std::size_t c = 0; c < full.cols(); ++c) full(full_row, c) = local(row, c);
          }
        }
        out.prediction = scale(full, data.scale);
        out.log = std::move(r.log);
        out.model_json = model_to_json(r.params);
        break;
      }
    }
  } catch (const DivergedError& e) {
    throw DivergedError("method " + method_name(m) + ": " + e.what(), e.epoch());
  }
  out.rmse_value = rmse(out.prediction, data.test);
  out.train_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

PlacementPlan build_plan(Method m, const ExperimentConfig& cfg, const PreparedData& data,
                         const Matrix& prediction, long long capacity) {
  PlacementPlan plan;
  const bool per_shard = m == Method::ddl || !cfg.dl_global_agg;
  std::vector<double> global_scores;
  if (!per_shard) {
    std::vector<std::size_t> all_rows(prediction.rows());
    for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
    global_scores = aggregate_popularity(prediction, all_rows);
  }
  for (int men = 1; men <= cfg.train.mens; ++men) {
    if (per_shard) {
      std::vector<std::size_t> rows;
      for (long user : data.manifest.users_of_men.at(men))
        rows.push_back(data.train.user_row(user));
      plan.mens.push_back(
          place_top_r(aggregate_popularity(prediction, rows), data.catalog, men, capacity));
    } else {
      plan.mens.push_back(place_top_r(global_scores, data.catalog, men, capacity));
    }
  }
  return plan;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  std::vector<RatingEvent> events;
  if (!cfg.data_path.empty()) {
    const std::string path = resolve_data_path(cfg.data_path);
    DataFormat format;
    if (cfg.data_format == "movielens-dat")
      format = DataFormat::movielens_dat;
    else if (cfg.data_format == "csv")
      format = DataFormat::csv;
    else if (cfg.data_format == "auto")
      format = path.ends_with(".dat") ? DataFormat::movielens_dat : DataFormat::csv;
    else
      throw ConfigError("data.format must be auto|movielens-dat|csv");
    events = ingest(path, format);
  } else {
    events = synth_zipf(cfg.synth_users, cfg.synth_contents, cfg.synth_density, cfg.synth_zipf_s,
                        RngStream(cfg.seed).fork(fork_tag(stream_kind::synth, 1)).seed());
  }

  PreparedData data;
  SplitPair pair =
      split(events, cfg.split_ratio,
            RngStream(cfg.seed).fork(fork_tag(stream_kind::split, 0)).seed());
  data.train = std::move(pair.train);
  data.test = std::move(pair.test);

  data.scale = data.train.max_value();
  if (data.scale <= 0.0) throw DataError("training split has no positive popularity factor");
  data.train_scaled = data.train.scaled(1.0 / data.scale);

  auto [shards, manifest] = shard(data.train_scaled, cfg.train.mens, cfg.seed);
  data.shards_scaled = std::move(shards);
  data.manifest = std::move(manifest);
  data.trace = build_request_trace(data.test, data.manifest);

  data.catalog.content_ids = data.train.content_ids();
  data.catalog.content_size_bytes = cfg.content_size_bytes;
  return data;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out << text;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto total_start = std::chrono::steady_clock::now();
  PreparedData data = prepare_data(cfg);

  std::vector<MethodOutcome> outcomes(cfg.methods.size());
  if (cfg.parallel && cfg.methods.size() > 1) {
    std::vector<std::exception_ptr> errors(cfg.methods.size());
    {
      std::vector<std::jthread> threads;
      threads.reserve(cfg.methods.size());
      for (std::size_t i = 0; i < cfg.methods.size(); ++i)
        threads.emplace_back([&, i] {
          try {
            outcomes[i] = run_method(cfg.methods[i], cfg, data);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t i = 0; i < cfg.methods.size(); ++i)
      outcomes[i] = run_method(cfg.methods[i], cfg, data);
  }

  ExperimentResult result;
  const bool write_files = !cfg.out_dir.empty();
  fs::path out_dir(cfg.out_dir);
  if (write_files) {
    fs::create_directories(out_dir / "placements");
    write_text(out_dir / "shard_manifest.json", data.manifest.to_json());
  }

  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const Method m = cfg.methods[i];
    const std::string name = method_name(m);
    const MethodOutcome& oc = outcomes[i];
    result.rmse_by_method[name] = oc.rmse_value;
    result.train_ms_by_method[name] = oc.train_ms;
    if (!oc.log.empty()) result.logs[name] = oc.log;

    for (long long capacity : cfg.capacities) {
      PlacementPlan plan = build_plan(m, cfg, data, oc.prediction, capacity);
      const ReplayResult rr = replay(plan, cfg.net, cfg.replay_policy, data.trace, data.catalog);
      result.rows.push_back({name, capacity, oc.rmse_value, rr.hit_rate, rr.avg_delay_s,
                             rr.local_hits, rr.neighbor_hits, rr.cs_fetches});
      if (write_files)
        write_text(out_dir / "placements" / (name + "_" + std::to_string(capacity) + ".json"),
                   plan.to_json());
    }
    if (write_files && !oc.log.empty()) {
      write_text(out_dir / ("trainlog_" + name + ".csv"), oc.log.to_csv());
      emit_learning_curve(oc.log, (out_dir / ("curve_" + name + ".csv")).string());
      write_text(out_dir / ("model_" + name + ".json"), oc.model_json);
    }
  }

  result.results_csv = results_to_csv(result.rows);

  nlohmann::ordered_json meta;
  meta["config"] = cfg.to_flat();
  meta["derived"]["scale_factor"] = data.scale;
  meta["derived"]["train_users"] = data.train.user_count();
  meta["derived"]["contents"] = data.train.content_count();
  meta["derived"]["train_observed"] = data.train.observed_count();
  meta["derived"]["test_observed"] = data.test.observed_count();
  for (const auto& m : cfg.methods)
    meta["derived"]["seed." + method_name(m)] = method_seed(cfg, m);
  for (const auto& [name, rm] : result.rmse_by_method) meta["rmse"][name] = rm;
  for (const auto& [name, ms] : result.train_ms_by_method) meta["timings_ms"][name] = ms;
  meta["timings_ms"]["total"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - total_start)
          .count();
  result.metadata_json = meta.dump(2);

  if (write_files) {
    write_text(out_dir / "results.csv", result.results_csv);
    write_text(out_dir / "metadata.json", result.metadata_json);
  }
  return result;
}

}  // namespace edgecache
