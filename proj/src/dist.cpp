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

#include "edgecache/dist.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <thread>

#include <nlohmann/json.hpp>

namespace edgecache {

void TrainConfig::validate() const {
  if (mens < 1) throw ConfigError("TrainConfig: MEN count must be >= 1");
  if (batch < 1) throw ConfigError("TrainConfig: batch size must be >= 1");
  if (epochs < 0) throw ConfigError("TrainConfig: epochs must be >= 0");
  if (patience < 0) throw ConfigError("TrainConfig: patience must be >= 0");
  for (std::size_t d : hidden_dims)
    if (d < 1) throw ConfigError("TrainConfig: hidden dims must be >= 1");
  const double rate = effective_dropout_rate();
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("TrainConfig: effective dropout rate must be in [0,1)");
  adam.validate();
  if (topology == Topology::ddl && batch % static_cast<std::size_t>(mens) != 0)
    throw ConfigError("TrainConfig: batch " + std::to_string(batch) +
                      " not divisible by MEN count " + std::to_string(mens));
}

std::string TrainLog::to_csv() const {
  std::string out = "epoch,loss,wall_ms,round_count\n";
  char line[96];
  for (const auto& e : epochs) {
    std::snprintf(line, sizeof(line), "%ld,%.12g,%.3f,%ld\n", e.epoch, e.loss, e.wall_ms,
                  e.round_count);
    out += line;
  }
  return out;
}

bool convergence_check(const TrainLog& log, double tol, int patience) {
  if (log.empty()) throw ContractError("convergence_check: empty log");
  if (patience <= 0) return false;
  const auto& e = log.epochs;
  if (e.size() < static_cast<std::size_t>(patience) + 1) return false;
  for (std::size_t k = e.size() - patience; k < e.size(); ++k) {
    const double prev = e[k - 1].loss;
    const double denom = std::max(std::abs(prev), 1e-300);
    const double rel_improvement = (prev - e[k].loss) / denom;
    if (rel_improvement >= tol) return false;
  }
  return true;
}

namespace {

// json helpers for the wire formats and model snapshots

nlohmann::json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

nlohmann::json gradient_json(const Gradient& g) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < g.dweights.size(); ++l)
    layers.push_back({{"dweight", matrix_json(g.dweights[l])}, {"dbias", g.dbiases[l]}});
  return layers;
}

nlohmann::json params_json(const ModelParams& p) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : p.layers)
    layers.push_back({{"weight", matrix_json(layer.weight)},
                      {"bias", layer.bias},
                      {"activation", layer.activation == Activation::relu ? "relu" : "linear"}});
  return layers;
}

ModelParams params_from_json(const nlohmann::json& j) {
  ModelParams p;
  for (const auto& lj : j) {
    Layer layer;
    layer.weight = matrix_from_json(lj.at("weight"));
    layer.bias = lj.at("bias").get<std::vector<double>>();
    layer.activation =
        lj.at("activation").get<std::string>() == "linear" ? Activation::linear : Activation::relu;
    p.layers.push_back(std::move(layer));
  }
  p.validate();
  return p;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

std::string GradientMsg::to_json() const {
  nlohmann::ordered_json j;
  j["men_id"] = men_id;
  j["round"] = round;
  j["gradient"] = gradient_json(gradient);
  j["sample_count"] = sample_count;
  j["batch_loss"] = batch_loss;
  return j.dump();
}

std::string ModelMsg::to_json() const {
  nlohmann::ordered_json j;
  j["round"] = round;
  j["params"] = params_json(params);
  return j.dump();
}

std::string model_to_json(const ModelParams& params) { return params_json(params).dump(); }

ModelParams model_from_json(const std::string& text) {
  return params_from_json(nlohmann::json::parse(text));
}

std::vector<LayerSpec> layer_specs_for(const TrainConfig& cfg, std::size_t feature_dim) {
  std::vector<LayerSpec> specs;
  std::size_t in = feature_dim;
  for (std::size_t h : cfg.hidden_dims) {
    specs.push_back({in, h, Activation::relu});
    in = h;
  }
  specs.push_back({in, feature_dim, cfg.output_activation});
  return specs;
}

LocalLearner::LocalLearner(const RatingMatrix& shard, const TrainConfig& cfg, int men_id,
                           std::size_t batch_size)
    : dropout_{cfg.effective_dropout_rate(), cfg.dropout.after_layer},
      shuffle_rng_(RngStream(cfg.seed).fork(
          fork_tag(stream_kind::shuffle, static_cast<std::uint64_t>(men_id)))),
      dropout_rng_(RngStream(cfg.seed).fork(
          fork_tag(stream_kind::dropout, static_cast<std::uint64_t>(men_id)))),
      batch_size_(batch_size),
      men_id_(men_id) {
  if (shard.user_count() == 0) throw ConfigError("LocalLearner: empty shard");
  if (batch_size_ == 0) throw ConfigError("LocalLearner: zero batch size");
  // Network orientation: contents on rows, users on columns.
  features_ = transpose(shard.dense());
  mask_ = cfg.zero_fill_loss ? Matrix(features_.rows(), features_.cols(),
                                      std::vector<double>(features_.size(), 1.0))
                             : transpose(shard.dense_mask());
  order_.resize(shard.user_count());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  rounds_per_epoch_ = static_cast<long>((order_.size() + batch_size_ - 1) / batch_size_);
}

GradientMsg LocalLearner::next_gradient(const ModelParams& params, long round) {
  if (cursor_ == 0) shuffle_rng_.shuffle(order_);
  const std::size_t take = std::min(batch_size_, order_.size() - cursor_);

  Matrix x(features_.rows(), take);
  Matrix m(features_.rows(), take);
  for (std::size_t b = 0; b < take; ++b) {
    const std::size_t col = order_[cursor_ + b];
    for (std::size_t i = 0; i < features_.rows(); ++i) {
      x(i, b) = features_(i, col);
      m(i, b) = mask_(i, col);
    }
  }
  cursor_ += take;
  if (cursor_ >= order_.size()) cursor_ = 0;

  auto [y, trace] = forward(params, x, dropout_, RunMode::train, &dropout_rng_);
  GradientMsg msg;
  msg.men_id = men_id_;
  msg.round = round;
  msg.batch_loss = masked_mse(y, x, m);
  msg.gradient = backward(params, trace, y, x, m);
  msg.sample_count = static_cast<long>(take);
  return msg;
}

namespace {

// Shared epoch bookkeeping for both trainers.
struct EpochTracker {
  TrainLog log;
  double loss_acc = 0.0;
  long rounds_in_epoch = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void add_round(double loss) {
    loss_acc += loss;
    ++rounds_in_epoch;
  }

  // Returns true when training should stop.
  bool close_epoch(long epoch, const TrainConfig& cfg) {
    const double mean_loss = loss_acc / static_cast<double>(rounds_in_epoch);
    if (!std::isfinite(mean_loss)) throw DivergedError("training loss is not finite", epoch);
    log.epochs.push_back({epoch, mean_loss, elapsed_ms(start), rounds_in_epoch});
    loss_acc = 0.0;
    rounds_in_epoch = 0;
    return cfg.patience > 0 && convergence_check(log, cfg.tol, cfg.patience);
  }
};

ModelParams init_model(const TrainConfig& cfg, std::size_t feature_dim) {
  RngStream init_rng = RngStream(cfg.seed).fork(fork_tag(stream_kind::init, 0));
  return ModelParams::init(layer_specs_for(cfg, feature_dim), init_rng);
}

}  // namespace

TrainResult run_centralized(const RatingMatrix& data, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.topology != Topology::dl)
    throw ConfigError("run_centralized: config topology must be dl");

  ModelParams params = init_model(cfg, data.content_count());
  if (cfg.epochs == 0) return {std::move(params), {}};

  AdamState state = AdamState::init(params);
  LocalLearner learner(data, cfg, 1, cfg.batch);
  EpochTracker tracker;

  long round = 0;
  for (long epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (long r = 0; r < learner.rounds_per_epoch(); ++r) {
      GradientMsg msg = learner.next_gradient(params, round);
      std::tie(params, state) = adam_step(std::move(params), std::move(state), msg.gradient,
                                          cfg.adam);
      tracker.add_round(msg.batch_loss);
      ++round;
    }
    if (tracker.close_epoch(epoch, cfg)) break;
  }
  return {std::move(params), std::move(tracker.log)};
}

namespace {

struct WorkerLink {
  Channel<ModelMsg> to_worker;
  Channel<GradientMsg> to_server;
  std::string error;  // non-empty after a worker failure
};

void worker_main(const RatingMatrix& shard, const TrainConfig& cfg, int men_id,
                 std::size_t local_batch, WorkerLink& link) {
  try {
    LocalLearner learner(shard, cfg, men_id, local_batch);
    while (true) {
      ModelMsg msg = link.to_worker.receive();
      if (msg.round < 0) return;  // shutdown sentinel
      link.to_server.send(learner.next_gradient(msg.params, msg.round));
    }
  } catch (const std::exception& e) {
    link.error = e.what();
    GradientMsg failure;
    failure.men_id = men_id;
    failure.round = -1;
    link.to_server.send(std::move(failure));
  }
}

Gradient weighted_mean(std::vector<GradientMsg>& msgs) {
  double total = 0.0;
  for (const auto& m : msgs) total += static_cast<double>(m.sample_count);
  if (total <= 0.0) throw ContractError("weighted_mean: zero total sample count");
  Gradient acc = msgs.front().gradient;  // copy shapes + values
  const double w0 = static_cast<double>(msgs.front().sample_count) / total;
  for (std::size_t l = 0; l < acc.dweights.size(); ++l) {
    for (auto& v : acc.dweights[l].data()) v *= w0;
    for (auto& v : acc.dbiases[l]) v *= w0;
  }
  for (std::size_t n = 1; n < msgs.size(); ++n) {
    const double w = static_cast<double>(msgs[n].sample_count) / total;
    const Gradient& g = msgs[n].gradient;
    if (!acc.same_shape(g)) throw ContractError("weighted_mean: gradient shape mismatch");
    for (std::size_t l = 0; l < acc.dweights.size(); ++l) {
      for (std::size_t i = 0; i < acc.dweights[l].size(); ++i)
        acc.dweights[l].data()[i] += w * g.dweights[l].data()[i];
      for (std::size_t i = 0; i < acc.dbiases[l].size(); ++i)
        acc.dbiases[l][i] += w * g.dbiases[l][i];
    }
  }
  return acc;
}

}  // namespace

TrainResult run_distributed(const std::vector<RatingMatrix>& shards, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.topology != Topology::ddl)
    throw ConfigError("run_distributed: config topology must be ddl");
  const int n = cfg.mens;
  if (shards.size() != static_cast<std::size_t>(n))
    throw ConfigError("run_distributed: got " + std::to_string(shards.size()) +
                      " shards for N = " + std::to_string(n));

  std::size_t min_users = shards.front().user_count(), max_users = min_users;
  std::size_t content_dim = shards.front().content_count();
  for (const auto& s : shards) {
    min_users = std::min(min_users, s.user_count());
    max_users = std::max(max_users, s.user_count());
    if (s.content_count() != content_dim)
      throw ConfigError("run_distributed: shards disagree on the content catalog");
  }
  if (max_users - min_users > 1)
    throw ConfigError("run_distributed: shard sizes differ by more than 1 user (" +
                      std::to_string(min_users) + ".." + std::to_string(max_users) + ")");

  const std::size_t local_batch = cfg.batch / static_cast<std::size_t>(n);
  const long rounds_per_epoch =
      static_cast<long>((max_users + local_batch - 1) / local_batch);
  for (const auto& s : shards) {
    const long r = static_cast<long>((s.user_count() + local_batch - 1) / local_batch);
    if (r != rounds_per_epoch)
      throw ConfigError(
          "run_distributed: shard sizes give unequal rounds per epoch; adjust batch or MEN "
          "count so every shard runs " +
          std::to_string(rounds_per_epoch) + " rounds");
  }

  ModelParams params = init_model(cfg, content_dim);
  if (cfg.epochs == 0) return {std::move(params), {}};

  AdamState state = AdamState::init(params);
  EpochTracker tracker;

  std::vector<std::unique_ptr<WorkerLink>> links;
  links.reserve(n);
  for (int i = 0; i < n; ++i) links.push_back(std::make_unique<WorkerLink>());
  std::vector<std::jthread> workers;
  workers.reserve(n);
  for (int i = 0; i < n; ++i)
    workers.emplace_back(worker_main, std::cref(shards[i]), std::cref(cfg), i + 1, local_batch,
                         std::ref(*links[i]));

  auto shutdown = [&] {
    for (auto& link : links) link->to_worker.send(ModelMsg{-1, {}});
  };

  long round = 0;
  try {
    for (long epoch = 1; epoch <= cfg.epochs; ++epoch) {
      for (long r = 0; r < rounds_per_epoch; ++r) {
        for (auto& link : links) link->to_worker.send(ModelMsg{round, params});

        // Synchronous barrier: exactly N gradients, consumed in men_id order.
        std::vector<GradientMsg> msgs;
        msgs.reserve(n);
        double round_loss = 0.0;
        for (int i = 0; i < n; ++i) {
          GradientMsg msg = links[i]->to_server.receive();
          if (msg.round < 0)
            throw ContractError("run_distributed: worker " + std::to_string(msg.men_id) +
                                " failed at round " + std::to_string(round) + ": " +
                                links[i]->error);
          if (msg.round != round)
            throw ContractError("run_distributed: staleness violation from MEN " +
                                std::to_string(msg.men_id) + " (got round " +
                                std::to_string(msg.round) + ", expected " +
                                std::to_string(round) + ")");
          round_loss += msg.batch_loss;
          msgs.push_back(std::move(msg));
        }

        Gradient global = cfg.weighted_average ? weighted_mean(msgs) : [&] {
          std::vector<Gradient> grads;
          grads.reserve(msgs.size());
          for (auto& m : msgs) grads.push_back(std::move(m.gradient));
          return average_gradients(grads);
        }();
        std::tie(params, state) =
            adam_step(std::move(params), std::move(state), global, cfg.adam);
        tracker.add_round(round_loss / static_cast<double>(n));
        ++round;
      }
      if (tracker.close_epoch(epoch, cfg)) break;
    }
  } catch (...) {
    shutdown();
    throw;
  }
  shutdown();
  return {std::move(params), std::move(tracker.log)};
}

Matrix predict(const ModelParams& params, const RatingMatrix& data) {
  const Matrix x = transpose(data.dense());
  DropoutSpec no_dropout{0.0, 0};
  auto [y, trace] = forward(params, x, no_dropout, RunMode::infer, nullptr);
  return transpose(y);
}

}  // namespace edgecache
