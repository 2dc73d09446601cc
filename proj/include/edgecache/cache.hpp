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

#ifndef EDGECACHE_CACHE_HPP
#define EDGECACHE_CACHE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "edgecache/data.hpp"
#include "edgecache/matrix.hpp"

namespace edgecache {

struct ContentCatalog {
  std::vector<long> content_ids;
  long long content_size_bytes = 200'000'000;  // uniform 200 MB contents

  void validate() const;
  bool contains(long content_id) const;
};

struct MenPlacement {
  int men_id = 0;
  long long capacity_bytes = 0;
  std::vector<long> contents;  // descending aggregated score, ties by id
};

struct PlacementPlan {
  std::vector<MenPlacement> mens;

  const MenPlacement& men(int men_id) const;
  // {"men_id": {"capacity_bytes": ..., "contents": [...]}}
  std::string to_json() const;
  static PlacementPlan from_json(const std::string& text);
};

// Per-content sums of predicted popularity over the given user rows of pred
// (users x contents). Rows out of range throw ContractError.
std::vector<double> aggregate_popularity(const Matrix& pred,
                                         const std::vector<std::size_t>& user_rows);

// Top-R selection under capacity: R = floor(capacity / content size); the R
// highest-score contents in descending score order, ties broken by ascending
// content id.
MenPlacement place_top_r(const std::vector<double>& scores, const ContentCatalog& catalog,
                         int men_id, long long capacity_bytes);

}  // namespace edgecache

#endif  // EDGECACHE_CACHE_HPP
