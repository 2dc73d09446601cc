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

#ifndef EDGECACHE_DIST_HPP
#define EDGECACHE_DIST_HPP

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "edgecache/data.hpp"
#include "edgecache/model.hpp"
#include "edgecache/optim.hpp"

namespace edgecache {

enum class Topology { dl, ddl };

struct TrainConfig {
  Topology topology = Topology::dl;
  int mens = 1;             // N
  std::size_t batch = 32;   // global mini-batch size (beta); beta/N per MEN
  long epochs = 100;        // T
  double tol = 1e-6;        // convergence: relative improvement threshold
  int patience = 10;        //   ... for this many consecutive epochs (0 = off)
  DropoutSpec dropout{0.8, 0};
  bool dropout_rate_is_keep = false;  // interpret dropout.rate as keep prob
  std::vector<std::size_t> hidden_dims = {64, 64};
  Activation output_activation = Activation::relu;
  bool zero_fill_loss = false;  // train against 0 targets on missing entries
  AdamConfig adam;
  std::uint64_t seed = 0;
  bool weighted_average = false;  // weight gradients by sample count

  double effective_dropout_rate() const {
    return dropout_rate_is_keep ? 1.0 - dropout.rate : dropout.rate;
  }
  void validate() const;
};

struct EpochStats {
  long epoch = 0;        // 1-based
  double loss = 0.0;     // mean mini-batch loss over the epoch
  double wall_ms = 0.0;  // cumulative wall time since training started
  long round_count = 0;  // optimizer rounds executed in this epoch
};

struct TrainLog {
  std::vector<EpochStats> epochs;

  bool empty() const { return epochs.empty(); }
  // `epoch,loss,wall_ms,round_count` rows; wall times are excluded from any
  // byte-level determinism guarantee.
  std::string to_csv() const;
};

struct TrainResult {
  ModelParams params;
  TrainLog log;
};

// Wire payload MEN -> CS. The gradient must come from the model of exactly
// the tagged round (staleness 0, checked at the barrier). batch_loss is the
// only data-derived scalar on the wire; no message carries rating entries.
struct GradientMsg {
  int men_id = 0;
  long round = 0;
  Gradient gradient;
  long sample_count = 0;
  double batch_loss = 0.0;

  std::string to_json() const;
};

// Wire payload CS -> MENs, broadcast identically to all workers. round < 0 is
// the shutdown sentinel.
struct ModelMsg {
  long round = 0;
  ModelParams params;

  std::string to_json() const;
};

// Unbounded blocking FIFO used as the in-process transport. A socket
// transport can replace this behind the same send/receive surface without
// touching the training state machine.
template <class T>
class Channel {
 public:
  void send(T value) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      items_.push_back(std::move(value));
    }
    cv_.notify_one();
  }

  T receive() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return !items_.empty(); });
    T value = std::move(items_.front());
    items_.pop_front();
    return value;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
};

// One MEN's local learning state: shard data, per-worker rng sub-streams
// (derived from (seed, men_id)), and the epoch/batch cursor. Both trainers
// run their arithmetic through this class, which is what makes DDL with N=1
// bit-identical to the centralized run.
class LocalLearner {
 public:
  LocalLearner(const RatingMatrix& shard, const TrainConfig& cfg, int men_id,
               std::size_t batch_size);

  // Gradient + loss of the next local mini-batch under `params`. Shuffles at
  // epoch boundaries from this worker's own sub-stream.
  GradientMsg next_gradient(const ModelParams& params, long round);

  std::size_t sample_count() const { return order_.size(); }
  long rounds_per_epoch() const { return rounds_per_epoch_; }

 private:
  Matrix features_;  // contents x users, zero-filled shard values
  Matrix mask_;      // observed indicators (all-ones in zero-fill mode)
  DropoutSpec dropout_;
  RngStream shuffle_rng_;
  RngStream dropout_rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t batch_size_;
  long rounds_per_epoch_;
  int men_id_;
};

// Mini-batch training on the whole dataset at the CS.
TrainResult run_centralized(const RatingMatrix& data, const TrainConfig& cfg);

// Synchronous parameter-server training: every round the CS broadcasts the
// current model, blocks for exactly N gradient messages tagged with that
// round, averages them in men_id order, and applies one optimizer step.
TrainResult run_distributed(const std::vector<RatingMatrix>& shards, const TrainConfig& cfg);

// True iff the relative epoch-loss improvement stayed below tol for the last
// `patience` consecutive epochs.
bool convergence_check(const TrainLog& log, double tol, int patience);

// Reconstructs every user row of `data` (rows=users) under the final model;
// infer mode, no dropout.
Matrix predict(const ModelParams& params, const RatingMatrix& data);

// Layer specs implied by a config for a given feature (content) count.
std::vector<LayerSpec> layer_specs_for(const TrainConfig& cfg, std::size_t feature_dim);

std::string model_to_json(const ModelParams& params);
ModelParams model_from_json(const std::string& text);

}  // namespace edgecache

#endif  // EDGECACHE_DIST_HPP
