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

#include "edgecache/cache.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

namespace edgecache {

void ContentCatalog::validate() const {
  if (content_size_bytes <= 0) throw ConfigError("ContentCatalog: content size must be > 0");
  if (content_ids.empty()) throw ConfigError("ContentCatalog: empty catalog");
}

bool ContentCatalog::contains(long content_id) const {
  return std::binary_search(content_ids.begin(), content_ids.end(), content_id);
}

const MenPlacement& PlacementPlan::men(int men_id) const {
  for (const auto& m : mens)
    if (m.men_id == men_id) return m;
  throw ContractError("PlacementPlan: no entry for MEN " + std::to_string(men_id));
}

std::string PlacementPlan::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& m : mens)
    j[std::to_string(m.men_id)] = {{"capacity_bytes", m.capacity_bytes},
                                   {"contents", m.contents}};
  return j.dump(2);
}

PlacementPlan PlacementPlan::from_json(const std::string& text) {
  PlacementPlan plan;
  auto j = nlohmann::json::parse(text);
  for (auto it = j.begin(); it != j.end(); ++it) {
    MenPlacement m;
    m.men_id = std::stoi(it.key());
    m.capacity_bytes = it.value().at("capacity_bytes").get<long long>();
    m.contents = it.value().at("contents").get<std::vector<long>>();
    plan.mens.push_back(std::move(m));
  }
  std::sort(plan.mens.begin(), plan.mens.end(),
            [](const MenPlacement& a, const MenPlacement& b) { return a.men_id < b.men_id; });
  return plan;
}

std::vector<double> aggregate_popularity(const Matrix& pred,
                                         const std::vector<std::size_t>& user_rows) {
  if (user_rows.empty()) throw ContractError("aggregate_popularity: empty user set");
  std::vector<double> scores(pred.cols(), 0.0);
  for (std::size_t row : user_rows) {
    if (row >= pred.rows())
      throw ContractError("aggregate_popularity: user row " + std::to_string(row) +
                          " out of range (" + std::to_string(pred.rows()) + " rows)");
    for (std::size_t c = 0; c < pred.cols(); ++c) scores[c] += pred(row, c);
  }
  return scores;
}

MenPlacement place_top_r(const std::vector<double>& scores, const ContentCatalog& catalog,
                         int men_id, long long capacity_bytes) {
  catalog.validate();
  if (scores.size() != catalog.content_ids.size())
    throw ContractError("place_top_r: score count " + std::to_string(scores.size()) +
                        " != catalog size " + std::to_string(catalog.content_ids.size()));

  MenPlacement placement;
  placement.men_id = men_id;
  placement.capacity_bytes = capacity_bytes;
  if (capacity_bytes <= 0) return placement;

  const auto r = static_cast<std::size_t>(capacity_bytes / catalog.content_size_bytes);
  if (r == 0) return placement;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return catalog.content_ids[a] < catalog.content_ids[b];
  });

  const std::size_t take = std::min(r, order.size());
  placement.contents.reserve(take);
  for (std::size_t i = 0; i < take; ++i) placement.contents.push_back(catalog.content_ids[order[i]]);
  return placement;
}

}  // namespace edgecache
