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

#ifndef EDGECACHE_DATA_HPP
#define EDGECACHE_DATA_HPP

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgecache/matrix.hpp"
#include "edgecache/rng.hpp"

namespace edgecache {

// One user-content interaction; rating doubles as the popularity factor.
struct RatingEvent {
  long user_id = 0;
  long content_id = 0;
  double rating = 0.0;  // popularity factor, >= 0
  long timestamp = 0;
};

enum class DataFormat { movielens_dat, csv };

struct Observation {
  std::size_t row = 0;  // user index
  std::size_t col = 0;  // content index
  double value = 0.0;

  bool operator==(const Observation&) const = default;
};

// Sparse user x content popularity matrix with stable, sorted id->index maps
// and a dense zero-filled view on demand. Duplicate (user, content) events
// resolve to the latest timestamp at construction.
class RatingMatrix {
 public:
  RatingMatrix() = default;

  static RatingMatrix from_events(const std::vector<RatingEvent>& events);

  // Builds over a fixed catalog (shared index maps); events referencing ids
  // outside the catalog throw ContractError.
  static RatingMatrix from_events_with_catalog(const std::vector<RatingEvent>& events,
                                               std::vector<long> user_ids,
                                               std::vector<long> content_ids);

  std::size_t user_count() const { return user_ids_.size(); }
  std::size_t content_count() const { return content_ids_.size(); }
  std::size_t observed_count() const { return entries_.size(); }

  const std::vector<long>& user_ids() const { return user_ids_; }
  const std::vector<long>& content_ids() const { return content_ids_; }
  const std::vector<Observation>& observations() const { return entries_; }

  bool has_user(long user_id) const { return user_index_.count(user_id) > 0; }
  std::size_t user_row(long user_id) const;
  std::size_t content_col(long content_id) const;
  long user_at(std::size_t row) const { return user_ids_.at(row); }
  long content_at(std::size_t col) const { return content_ids_.at(col); }

  // Dense zero-filled view (users x contents) and its 0/1 observed mask.
  Matrix dense() const;
  Matrix dense_mask() const;

  double max_value() const;

  // Rows restricted to the given users, full content axis; row order follows
  // ascending user id.
  RatingMatrix select_users(const std::vector<long>& users) const;

  // Copy with every observed value multiplied by `factor`.
  RatingMatrix scaled(double factor) const;

  bool operator==(const RatingMatrix& other) const;

 private:
  std::vector<long> user_ids_;     // ascending
  std::vector<long> content_ids_;  // ascending
  std::unordered_map<long, std::size_t> user_index_;
  std::unordered_map<long, std::size_t> content_index_;
  std::vector<Observation> entries_;  // sorted by (row, col)

  void rebuild_index();
};

struct SplitPair {
  RatingMatrix train;
  RatingMatrix test;
  std::uint64_t seed = 0;
};

// user_id -> men_id assignment produced by shard(); serialized as
// {"men_id": [user_ids...]}.
struct ShardManifest {
  std::map<int, std::vector<long>> users_of_men;  // sorted user ids per MEN

  int men_of_user(long user_id) const;
  std::string to_json() const;
  static ShardManifest from_json(const std::string& text);

 private:
  mutable std::unordered_map<long, int> reverse_;  // lazily built
};

// Parses rating files. movielens-dat: `UserID::MovieID::Rating::Timestamp`
// per line; csv: header `user_id,content_id,rating,timestamp`. Malformed
// lines throw ParseError with the line number; an event-free file throws
// DataError.
std::vector<RatingEvent> ingest(const std::string& path, DataFormat format);
std::vector<RatingEvent> parse_events(const std::string& text, DataFormat format);

void write_events_csv(const std::vector<RatingEvent>& events, const std::string& path);
std::string events_to_csv(const std::vector<RatingEvent>& events);

// Canonical CSV of a matrix's observations (timestamps zeroed); ingesting it
// back yields an identical RatingMatrix.
std::string matrix_to_csv(const RatingMatrix& m);

// Per-user stratified random split. Global test size is round((1-ratio)*n),
// allocated across users by largest remainder; users keep at least one train
// rating, and users with fewer than two ratings go entirely to train.
SplitPair split(const std::vector<RatingEvent>& events, double ratio, std::uint64_t seed);

// Users partitioned into n shards (sizes differ by at most 1) by round-robin
// over a seeded shuffle; every shard keeps the full content axis.
std::pair<std::vector<RatingMatrix>, ShardManifest> shard(const RatingMatrix& x, int n,
                                                          std::uint64_t seed);

// Synthetic workload: every user rates round(density * contents) distinct
// contents drawn without replacement with probability proportional to
// content_id^(-s); ratings in {1..5} tilt upward for popular contents.
std::vector<RatingEvent> synth_zipf(std::size_t users, std::size_t contents, double density,
                                    double zipf_exponent, std::uint64_t seed);

}  // namespace edgecache

#endif  // EDGECACHE_DATA_HPP
