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

// Experiment runner: demand prediction (SVD/NMF/DL/DDL), top-R content
// placement and request-replay evaluation over a capacity sweep.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "edgecache/experiment.hpp"

namespace fs = std::filesystem;
using namespace edgecache;

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

// Flags are collected as flat dotted-key strings so that file config and CLI
// share one resolution order: defaults < --config file < explicit flags.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::string config_path;

  void set(const std::string& key, const std::string& value) { values[key] = value; }

  ExperimentConfig resolve() const {
    std::map<std::string, std::string> merged;
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw ConfigError("cannot open config file: " + config_path);
      std::ostringstream buf;
      buf << in.rdbuf();
      merged = ExperimentConfig::flat_from_json_text(buf.str());
    }
    for (const auto& [k, v] : values) merged[k] = v;
    return ExperimentConfig::from_flat(merged);
  }
};

void add_common_flags(CLI::App* cmd, FlagSet& flags) {
  cmd->add_option_function<std::string>(
         "--config", [&](const std::string& v) { flags.config_path = v; },
         "JSON config file with flat dotted keys mirroring these flags");
  auto opt = [&flags, cmd](const std::string& flag, const std::string& key,
                           const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&flags, key](const std::string& v) { flags.set(key, v); }, help);
  };
  auto toggle = [&flags, cmd](const std::string& flag, const std::string& key,
                              const std::string& help) {
    cmd->add_flag_callback(
        flag, [&flags, key]() { flags.set(key, "true"); }, help);
  };

  opt("--seed", "seed", "root random seed");
  opt("--out", "out.dir", "output directory");
  opt("--data", "data.path", "rating file (also looked up in $EDGECACHE_DATA_DIR)");
  opt("--format", "data.format", "auto|movielens-dat|csv");
  opt("--synth-users", "synth.users", "synthetic workload: user count");
  opt("--synth-contents", "synth.contents", "synthetic workload: content count");
  opt("--synth-density", "synth.density", "synthetic workload: observed fraction (0,1]");
  opt("--synth-zipf-s", "synth.zipf_s", "synthetic workload: popularity exponent");
  opt("--split-ratio", "split.ratio", "train fraction (default 0.8)");
  opt("--methods", "methods", "comma list out of svd,nmf,dl,ddl");
  opt("--mens", "train.mens", "number of MENs (N)");
  opt("--batch", "train.batch", "global mini-batch size (beta; beta/N per MEN)");
  opt("--epochs", "train.epochs", "max epoch count (T)");
  opt("--tol", "train.tol", "convergence tolerance on relative loss improvement");
  opt("--patience", "train.patience", "epochs under tol before stopping (0 = off)");
  opt("--dropout", "train.dropout", "dropout fraction rate r");
  opt("--dropout-after", "train.dropout_after",
      "1-based layer the dropout mask sits after (0 = last hidden)");
  toggle("--dropout-keep", "train.dropout_keep", "interpret r as the keep probability");
  opt("--hidden", "train.hidden", "hidden layer widths, e.g. 64,64");
  opt("--output-activation", "train.output_activation", "relu|linear output layer");
  toggle("--zero-fill", "train.zero_fill", "train against 0 targets on missing entries");
  opt("--adam-mode", "train.adam_mode", "paper|standard moment recurrence");
  opt("--adam-step", "train.adam_step", "base step size (lambda)");
  toggle("--weighted-average", "train.weighted_average",
         "weight gradient averaging by sample counts");
  opt("--svd-rank", "baselines.svd_rank", "truncation rank for the SVD baseline");
  opt("--nmf-rank", "baselines.nmf_rank", "factor rank for the NMF baseline");
  opt("--nmf-iters", "baselines.nmf_iters", "NMF multiplicative-update iterations");
  opt("--bw-cs", "net.bw_cs_bps", "MEN<->CS bandwidth in bit/s");
  opt("--bw-men", "net.bw_men_bps", "MEN<->MEN bandwidth in bit/s");
  opt("--bw-user", "net.bw_user_bps", "MEN<->user bandwidth in bit/s");
  opt("--content-size", "cache.content_size_bytes", "uniform content size in bytes");
  opt("--capacities", "cache.capacities", "comma list of per-MEN capacities in bytes");
  cmd->add_flag_callback(
      "--per-men-agg", [&flags]() { flags.set("cache.dl_global_agg", "false"); },
      "aggregate centralized predictions per MEN's users instead of all users");
  toggle("--count-neighbor-hits", "replay.count_neighbor_hits",
         "count neighbor fetches as cache hits");
  toggle("--zero-local-delay", "replay.zero_local_delay", "local hits cost zero delay");
  toggle("--parallel", "parallel", "run methods in parallel threads");
}

int cmd_synth(const FlagSet& flags, const std::string& out_file) {
  ExperimentConfig cfg = flags.resolve();
  if (cfg.synth_users == 0 || cfg.synth_contents == 0)
    throw ConfigError("synth needs --synth-users and --synth-contents");
  const auto events = synth_zipf(cfg.synth_users, cfg.synth_contents, cfg.synth_density,
                                 cfg.synth_zipf_s,
                                 RngStream(cfg.seed).fork(fork_tag(stream_kind::synth, 1)).seed());
  write_events_csv(events, out_file);
  std::cout << "wrote " << events.size() << " events to " << out_file << "\n";
  return 0;
}

int cmd_fetch(const std::string& out_dir_flag) {
  const char* env = std::getenv("EDGECACHE_DATA_DIR");
  const fs::path dir = !out_dir_flag.empty() ? fs::path(out_dir_flag)
                       : env != nullptr      ? fs::path(env)
                                             : fs::path("data");
  const fs::path ratings = dir / "ml-1m" / "ratings.dat";
  if (fs::exists(ratings)) {
    std::cout << "found " << ratings.string() << "\n";
    return 0;
  }
  std::cout << "MovieLens 1M is not vendored with this project.\n"
            << "Download https://files.grouplens.org/datasets/movielens/ml-1m.zip\n"
            << "and extract it so that " << ratings.string() << " exists,\n"
            << "then point --data (or EDGECACHE_DATA_DIR) at it, e.g.\n"
            << "  EDGECACHE_DATA_DIR=" << dir.string()
            << " edgecache sweep --data ml-1m/ratings.dat --format movielens-dat\n";
  return kExitError;
}

int cmd_train(const FlagSet& flags, const std::string& topology) {
  ExperimentConfig cfg = flags.resolve();
  if (topology != "dl" && topology != "ddl") throw ConfigError("--topology must be dl|ddl");
  cfg.methods = {topology == "dl" ? Method::dl : Method::ddl};
  // Reuse the pipeline with an empty capacity sweep surrogate: a single
  // smallest capacity keeps the placement/replay stage cheap.
  if (cfg.capacities.size() > 1) cfg.capacities = {cfg.capacities.front()};
  ExperimentResult result = run_experiment(cfg);
  const std::string name = method_name(cfg.methods.front());
  std::cout << "trained " << name << ": test rmse " << result.rmse_by_method.at(name) << ", "
            << result.logs.at(name).epochs.size() << " epochs, outputs in " << cfg.out_dir
            << "\n";
  return 0;
}

int cmd_run(const FlagSet& flags) {
  ExperimentConfig cfg = flags.resolve();
  ExperimentResult result = run_experiment(cfg);
  std::cout << result.results_csv;
  if (!cfg.out_dir.empty()) std::cout << "outputs written to " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proactive edge-cache demand prediction and placement experiments"};
  app.require_subcommand(1);

  FlagSet flags;
  std::string synth_out = "synth.csv";
  std::string fetch_dir;
  std::string topology = "dl";

  auto* synth = app.add_subcommand("synth", "generate a synthetic rating workload CSV");
  add_common_flags(synth, flags);
  synth->add_option("--out-file", synth_out, "output CSV path");

  auto* fetch = app.add_subcommand("fetch", "locate or explain how to fetch MovieLens 1M");
  fetch->add_option("--dir", fetch_dir, "dataset directory (default $EDGECACHE_DATA_DIR)");

  auto* train = app.add_subcommand("train", "train one predictor and dump its learning curve");
  add_common_flags(train, flags);
  train->add_option("--topology", topology, "dl|ddl");

  auto* evaluate =
      app.add_subcommand("evaluate", "fit, predict and replay the selected methods");
  add_common_flags(evaluate, flags);

  auto* sweep = app.add_subcommand("sweep", "four-method comparison over a capacity sweep");
  add_common_flags(sweep, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(flags, synth_out);
    if (fetch->parsed()) return cmd_fetch(fetch_dir);
    if (train->parsed()) return cmd_train(flags, topology);
    if (evaluate->parsed() || sweep->parsed()) return cmd_run(flags);
    throw ConfigError("no subcommand given");
  } catch (const DivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
