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

#ifndef EDGECACHE_EVAL_HPP
#define EDGECACHE_EVAL_HPP

#include <vector>

#include "edgecache/cache.hpp"
#include "edgecache/data.hpp"
#include "edgecache/matrix.hpp"

namespace edgecache {

// Link model for the replay simulator. Adjacency lists MEN pairs with a
// direct link; full_mesh short-circuits it to "every pair connected".
struct NetworkTopology {
  int mens = 6;
  double bw_cs_bps = 60e6;    // MEN <-> CS backhaul
  double bw_men_bps = 100e6;  // MEN <-> MEN
  double bw_user_bps = 100e6; // MEN <-> user
  bool full_mesh = true;
  std::vector<std::pair<int, int>> adjacency;  // used when !full_mesh

  void validate() const;
  bool adjacent(int a, int b) const;
};

struct ReplayPolicy {
  bool count_neighbor_hits = false;  // count neighbor fetches as cache hits
  bool zero_local_delay = false;     // literal "instant" local service
};

struct Request {
  long user_id = 0;
  long content_id = 0;
  int home_men = 0;
};

struct ReplayResult {
  long long requests = 0;
  long long local_hits = 0;
  long long neighbor_hits = 0;
  long long cs_fetches = 0;
  double hit_rate = 0.0;
  double avg_delay_s = 0.0;
};

// Root mean squared error over the observed test entries, with pred rows
// aligned to the test matrix's user/content indexing.
double rmse(const Matrix& pred, const RatingMatrix& test);

// One request per observed test entry, homed via the shard manifest and
// sorted by (user id, content id).
std::vector<Request> build_request_trace(const RatingMatrix& test, const ShardManifest& manifest);

// Static-cache replay. Per request: local hit costs size/bw_user; a fetch
// from a directly connected caching MEN adds size/bw_men; a CS fetch adds
// size/bw_cs. Caches do not change during replay.
ReplayResult replay(const PlacementPlan& plan, const NetworkTopology& topo,
                    const ReplayPolicy& policy, const std::vector<Request>& requests,
                    const ContentCatalog& catalog);

}  // namespace edgecache

#endif  // EDGECACHE_EVAL_HPP
