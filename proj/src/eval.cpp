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

#include "edgecache/eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace edgecache {

void NetworkTopology::validate() const {
  if (mens < 1) throw ConfigError("NetworkTopology: MEN count must be >= 1");
  if (!(bw_cs_bps > 0.0) || !(bw_men_bps > 0.0) || !(bw_user_bps > 0.0))
    throw ConfigError("NetworkTopology: bandwidths must be > 0");
  for (const auto& [a, b] : adjacency)
    if (a < 1 || a > mens || b < 1 || b > mens || a == b)
      throw ConfigError("NetworkTopology: bad adjacency pair (" + std::to_string(a) + "," +
                        std::to_string(b) + ")");
}

bool NetworkTopology::adjacent(int a, int b) const {
  if (a == b) return false;
  if (full_mesh) return true;
  for (const auto& [x, y] : adjacency)
    if ((x == a && y == b) || (x == b && y == a)) return true;
  return false;
}

double rmse(const Matrix& pred, const RatingMatrix& test) {
  if (test.observed_count() == 0) throw DataError("rmse: empty test set");
  if (pred.rows() != test.user_count() || pred.cols() != test.content_count())
    throw ShapeError("rmse: prediction " + pred.shape_str() + " does not match test matrix (" +
                     std::to_string(test.user_count()) + "x" +
                     std::to_string(test.content_count()) + ")");
  double acc = 0.0;
  for (const auto& obs : test.observations()) {
    const double r = pred(obs.row, obs.col) - obs.value;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(test.observed_count()));
}

std::vector<Request> build_request_trace(const RatingMatrix& test,
                                         const ShardManifest& manifest) {
  std::vector<Request> trace;
  trace.reserve(test.observed_count());
  for (const auto& obs : test.observations()) {
    const long user = test.user_at(obs.row);
    trace.push_back({user, test.content_at(obs.col), manifest.men_of_user(user)});
  }
  std::sort(trace.begin(), trace.end(), [](const Request& a, const Request& b) {
    return a.user_id != b.user_id ? a.user_id < b.user_id : a.content_id < b.content_id;
  });
  return trace;
}

ReplayResult replay(const PlacementPlan& plan, const NetworkTopology& topo,
                    const ReplayPolicy& policy, const std::vector<Request>& requests,
                    const ContentCatalog& catalog) {
  topo.validate();
  catalog.validate();

  std::unordered_map<int, std::unordered_set<long>> cached;
  for (const auto& m : plan.mens) cached[m.men_id].insert(m.contents.begin(), m.contents.end());

  const double size_bits = static_cast<double>(catalog.content_size_bytes) * 8.0;
  const double user_leg = size_bits / topo.bw_user_bps;
  const double men_leg = size_bits / topo.bw_men_bps;
  const double cs_leg = size_bits / topo.bw_cs_bps;

  ReplayResult result;
  double delay_acc = 0.0;
  for (const auto& req : requests) {
    if (!catalog.contains(req.content_id))
      throw ContractError("replay: unknown content id " + std::to_string(req.content_id));
    if (req.home_men < 1 || req.home_men > topo.mens)
      throw ContractError("replay: request homed at unknown MEN " +
                          std::to_string(req.home_men));
    ++result.requests;

    const auto home_it = cached.find(req.home_men);
    if (home_it != cached.end() && home_it->second.count(req.content_id) > 0) {
      ++result.local_hits;
      delay_acc += policy.zero_local_delay ? 0.0 : user_leg;
      continue;
    }
    bool neighbor = false;
    for (const auto& [men, contents] : cached) {
      if (men == req.home_men || !topo.adjacent(req.home_men, men)) continue;
      if (contents.count(req.content_id) > 0) {
        neighbor = true;
        break;
      }
    }
    if (neighbor) {
      ++result.neighbor_hits;
      delay_acc += men_leg + user_leg;
    } else {
      ++result.cs_fetches;
      delay_acc += cs_leg + user_leg;
    }
  }

  if (result.requests > 0) {
    const auto hits =
        result.local_hits + (policy.count_neighbor_hits ? result.neighbor_hits : 0);
    result.hit_rate = static_cast<double>(hits) / static_cast<double>(result.requests);
    result.avg_delay_s = delay_acc / static_cast<double>(result.requests);
  }
  return result;
}

}  // namespace edgecache
