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

#include <algorithm>
#include <set>

#include "edgecache/cache.hpp"

using namespace edgecache;

namespace {
const long long MB = 1'000'000;
}

TEST_SUITE("cache") {

TEST_CASE("aggregate_popularity sums per content over the men's users") {
  // one user
  const Matrix one(1, 2, {0.2, 0.7});
  auto s = aggregate_popularity(one, {0});
  CHECK(s == std::vector<double>{0.2, 0.7});

  // two complementary users
  const Matrix two(2, 2, {1, 0, 0, 1});
  s = aggregate_popularity(two, {0, 1});
  CHECK(s == std::vector<double>{1.0, 1.0});

  // direct column-sum oracle on a random block
  RngStream rng(3);
  const Matrix pred = Matrix::random_uniform(3, 4, 0.0, 1.0, rng);
  s = aggregate_popularity(pred, {0, 1, 2});
  for (std::size_t c = 0; c < 4; ++c) {
    const double expect = pred(0, c) + pred(1, c) + pred(2, c);
    CHECK(s[c] == doctest::Approx(expect).epsilon(1e-15));
  }

  CHECK_THROWS_AS(aggregate_popularity(pred, {5}), ContractError);
  CHECK_THROWS_AS(aggregate_popularity(pred, {}), ContractError);
}

TEST_CASE("place_top_r follows capacity, order and tie rules") {
  const ContentCatalog catalog{{1, 2, 3}, 200 * MB};

  // scores {A:5, B:3, C:9}, capacity 400MB -> R = 2 -> [C, A]
  auto p = place_top_r({5.0, 3.0, 9.0}, catalog, 1, 400 * MB);
  CHECK(p.contents == std::vector<long>{3, 1});

  // zero capacity -> empty cache
  p = place_top_r({5.0, 3.0, 9.0}, catalog, 1, 0);
  CHECK(p.contents.empty());

  // tie at the cut: lowest content id wins
  p = place_top_r({5.0, 5.0, 1.0}, catalog, 1, 200 * MB);
  CHECK(p.contents == std::vector<long>{1});

  // capacity beyond the catalog caches everything
  p = place_top_r({5.0, 3.0, 9.0}, catalog, 1, 5000 * MB);
  CHECK(p.contents.size() == 3);
}

TEST_CASE("top-r sets are nested as capacity grows") {
  RngStream rng(9);
  std::vector<long> ids;
  for (long i = 1; i <= 40; ++i) ids.push_back(i);
  const ContentCatalog catalog{ids, 200 * MB};
  std::vector<double> scores;
  for (int i = 0; i < 40; ++i) scores.push_back(rng.next_double());

  std::set<long> prev;
  std::size_t prev_size = 0;
  for (long long cap : {0LL, 400 * MB, 1000 * MB, 2000 * MB, 4000 * MB, 9000 * MB}) {
    const auto p = place_top_r(scores, catalog, 2, cap);
    CHECK(p.contents.size() >= prev_size);
    CHECK(static_cast<long long>(p.contents.size()) * catalog.content_size_bytes <= cap);
    const std::set<long> cur(p.contents.begin(), p.contents.end());
    CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = cur;
    prev_size = p.contents.size();
  }
}

TEST_CASE("placement is invariant to positive rescaling") {
  RngStream rng(10);
  std::vector<long> ids{1, 2, 3, 4, 5, 6, 7};
  const ContentCatalog catalog{ids, 200 * MB};
  std::vector<double> scores;
  for (int i = 0; i < 7; ++i) scores.push_back(rng.next_double());
  std::vector<double> scaled = scores;
  for (auto& v : scaled) v *= 37.5;

  const auto a = place_top_r(scores, catalog, 1, 600 * MB);
  const auto b = place_top_r(scaled, catalog, 1, 600 * MB);
  CHECK(a.contents == b.contents);
}

TEST_CASE("no duplicate ids within a placement") {
  const ContentCatalog catalog{{1, 2, 3, 4}, 100 * MB};
  const auto p = place_top_r({1.0, 1.0, 1.0, 1.0}, catalog, 1, 400 * MB);
  std::set<long> unique(p.contents.begin(), p.contents.end());
  CHECK(unique.size() == p.contents.size());
}

TEST_CASE("placement plan json round-trips") {
  PlacementPlan plan;
  plan.mens.push_back({1, 400 * MB, {3, 1}});
  plan.mens.push_back({2, 200 * MB, {2}});
  const PlacementPlan back = PlacementPlan::from_json(plan.to_json());
  REQUIRE(back.mens.size() == 2);
  CHECK(back.men(1).contents == std::vector<long>{3, 1});
  CHECK(back.men(2).capacity_bytes == 200 * MB);
  CHECK_THROWS_AS(back.men(9), ContractError);
}

}  // TEST_SUITE
