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

#include "edgecache/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace edgecache {

namespace {

// Last-timestamp-wins dedupe; ties resolve to the later event in input order.
std::map<std::pair<long, long>, RatingEvent> dedupe(const std::vector<RatingEvent>& events) {
  std::map<std::pair<long, long>, RatingEvent> latest;
  for (const auto& e : events) {
    auto key = std::make_pair(e.user_id, e.content_id);
    auto it = latest.find(key);
    if (it == latest.end() || e.timestamp >= it->second.timestamp) latest[key] = e;
  }
  return latest;
}

void validate_event(const RatingEvent& e) {
  if (e.user_id < 1 || e.content_id < 1)
    throw DataError("rating event ids must be >= 1, got user " + std::to_string(e.user_id) +
                    " content " + std::to_string(e.content_id));
  if (!(e.rating >= 0.0) || !std::isfinite(e.rating))
    throw DataError("popularity factor must be finite and >= 0, got " +
                    std::to_string(e.rating));
}

}  // namespace

RatingMatrix RatingMatrix::from_events(const std::vector<RatingEvent>& events) {
  std::set<long> users, contents;
  for (const auto& e : events) {
    validate_event(e);
    users.insert(e.user_id);
    contents.insert(e.content_id);
  }
  return from_events_with_catalog(events, {users.begin(), users.end()},
                                  {contents.begin(), contents.end()});
}

RatingMatrix RatingMatrix::from_events_with_catalog(const std::vector<RatingEvent>& events,
                                                    std::vector<long> user_ids,
                                                    std::vector<long> content_ids) {
  std::sort(user_ids.begin(), user_ids.end());
  std::sort(content_ids.begin(), content_ids.end());
  RatingMatrix m;
  m.user_ids_ = std::move(user_ids);
  m.content_ids_ = std::move(content_ids);
  m.rebuild_index();

  for (const auto& [key, e] : dedupe(events)) {
    validate_event(e);
    auto uit = m.user_index_.find(e.user_id);
    auto cit = m.content_index_.find(e.content_id);
    if (uit == m.user_index_.end() || cit == m.content_index_.end())
      throw ContractError("RatingMatrix: event (" + std::to_string(e.user_id) + "," +
                          std::to_string(e.content_id) + ") outside the catalog");
    m.entries_.push_back({uit->second, cit->second, e.rating});
  }
  std::sort(m.entries_.begin(), m.entries_.end(), [](const Observation& a, const Observation& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return m;
}

void RatingMatrix::rebuild_index() {
  user_index_.clear();
  content_index_.clear();
  for (std::size_t i = 0; i < user_ids_.size(); ++i) user_index_[user_ids_[i]] = i;
  for (std::size_t i = 0; i < content_ids_.size(); ++i) content_index_[content_ids_[i]] = i;
}

std::size_t RatingMatrix::user_row(long user_id) const {
  auto it = user_index_.find(user_id);
  if (it == user_index_.end())
    throw ContractError("RatingMatrix: unknown user id " + std::to_string(user_id));
  return it->second;
}

std::size_t RatingMatrix::content_col(long content_id) const {
  auto it = content_index_.find(content_id);
  if (it == content_index_.end())
    throw ContractError("RatingMatrix: unknown content id " + std::to_string(content_id));
  return it->second;
}

Matrix RatingMatrix::dense() const {
  Matrix m(user_count(), content_count());
  for (const auto& e : entries_) m(e.row, e.col) = e.value;
  return m;
}

Matrix RatingMatrix::dense_mask() const {
  Matrix m(user_count(), content_count());
  for (const auto& e : entries_) m(e.row, e.col) = 1.0;
  return m;
}

double RatingMatrix::max_value() const {
  double mx = 0.0;
  for (const auto& e : entries_) mx = std::max(mx, e.value);
  return mx;
}

RatingMatrix RatingMatrix::select_users(const std::vector<long>& users) const {
  std::vector<long> sorted = users;
  std::sort(sorted.begin(), sorted.end());
  RatingMatrix out;
  out.user_ids_ = sorted;
  out.content_ids_ = content_ids_;
  out.rebuild_index();
  for (const auto& e : entries_) {
    auto it = out.user_index_.find(user_ids_[e.row]);
    if (it != out.user_index_.end()) out.entries_.push_back({it->second, e.col, e.value});
  }
  // entries_ already sorted by (row, col) in parent order; re-sort for the
  // new row numbering.
  std::sort(out.entries_.begin(), out.entries_.end(),
            [](const Observation& a, const Observation& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  return out;
}

RatingMatrix RatingMatrix::scaled(double factor) const {
  RatingMatrix out = *this;
  for (auto& e : out.entries_) e.value *= factor;
  return out;
}

bool RatingMatrix::operator==(const RatingMatrix& other) const {
  return user_ids_ == other.user_ids_ && content_ids_ == other.content_ids_ &&
         entries_ == other.entries_;
}

int ShardManifest::men_of_user(long user_id) const {
  if (reverse_.empty()) {
    for (const auto& [men, users] : users_of_men)
      for (long u : users) reverse_[u] = men;
  }
  auto it = reverse_.find(user_id);
  if (it == reverse_.end())
    throw ContractError("ShardManifest: user " + std::to_string(user_id) +
                        " is not assigned to any MEN");
  return it->second;
}

std::string ShardManifest::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& [men, users] : users_of_men) j[std::to_string(men)] = users;
  return j.dump(2);
}

ShardManifest ShardManifest::from_json(const std::string& text) {
  ShardManifest m;
  auto j = nlohmann::json::parse(text);
  for (auto it = j.begin(); it != j.end(); ++it)
    m.users_of_men[std::stoi(it.key())] = it.value().get<std::vector<long>>();
  return m;
}

namespace {

long parse_long(std::string_view field, std::size_t line, const char* what) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(std::string("bad ") + what + " '" + std::string(field) + "'", line);
  return value;
}

double parse_rating(std::string_view field, std::size_t line) {
  try {
    std::size_t used = 0;
    const std::string s(field);
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing garbage");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad rating '" + std::string(field) + "'", line);
  }
}

std::vector<std::string_view> split_fields(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return out;
}

}  // namespace

std::vector<RatingEvent> parse_events(const std::string& text, DataFormat format) {
  std::vector<RatingEvent> events;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  const std::string sep = format == DataFormat::movielens_dat ? "::" : ",";
  bool header_allowed = format == DataFormat::csv;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header_allowed) {
      header_allowed = false;
      if (line == "user_id,content_id,rating,timestamp") continue;
    }
    const auto fields = split_fields(line, sep);
    if (fields.size() != 4)
      throw ParseError("expected 4 fields separated by '" + sep + "', got " +
                           std::to_string(fields.size()),
                       lineno);
    RatingEvent e;
    e.user_id = parse_long(fields[0], lineno, "user id");
    e.content_id = parse_long(fields[1], lineno, "content id");
    e.rating = parse_rating(fields[2], lineno);
    e.timestamp = parse_long(fields[3], lineno, "timestamp");
    validate_event(e);
    events.push_back(e);
  }
  if (events.empty()) throw DataError("no rating events found");
  return events;
}

std::vector<RatingEvent> ingest(const std::string& path, DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open rating file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_events(buf.str(), format);
}

std::string events_to_csv(const std::vector<RatingEvent>& events) {
  std::string out = "user_id,content_id,rating,timestamp\n";
  char line[128];
  for (const auto& e : events) {
    std::snprintf(line, sizeof(line), "%ld,%ld,%.17g,%ld\n", e.user_id, e.content_id, e.rating,
                  e.timestamp);
    out += line;
  }
  return out;
}

void write_events_csv(const std::vector<RatingEvent>& events, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path);
  out << events_to_csv(events);
}

std::string matrix_to_csv(const RatingMatrix& m) {
  std::vector<RatingEvent> events;
  events.reserve(m.observed_count());
  for (const auto& obs : m.observations())
    events.push_back({m.user_at(obs.row), m.content_at(obs.col), obs.value, 0});
  return events_to_csv(events);
}

SplitPair split(const std::vector<RatingEvent>& events, double ratio, std::uint64_t seed) {
  if (events.size() < 5) throw DataError("split: need at least 5 events");
  if (ratio <= 0.0 || ratio >= 1.0) throw ConfigError("split: ratio must be in (0,1)");

  const auto latest = dedupe(events);
  std::map<long, std::vector<RatingEvent>> per_user;
  std::set<long> contents;
  for (const auto& [key, e] : latest) {
    per_user[e.user_id].push_back(e);
    contents.insert(e.content_id);
  }
  const std::size_t total = latest.size();
  const auto target_test = static_cast<std::size_t>(std::llround((1.0 - ratio) * total));

  // Largest-remainder allocation of the global test budget across users,
  // capped so every user keeps at least one train rating.
  struct Alloc {
    long user;
    std::size_t base, cap;
    double remainder;
  };
  std::vector<Alloc> allocs;
  std::size_t base_sum = 0;
  for (const auto& [user, evs] : per_user) {
    Alloc a{user, 0, 0, 0.0};
    if (evs.size() >= 2) {
      const double quota = (1.0 - ratio) * static_cast<double>(evs.size());
      a.cap = evs.size() - 1;
      a.base = std::min(static_cast<std::size_t>(quota), a.cap);
      a.remainder = quota - std::floor(quota);
    }
    base_sum += a.base;
    allocs.push_back(a);
  }
  std::vector<std::size_t> give(allocs.size(), 0);
  if (target_test > base_sum) {
    std::size_t remaining = target_test - base_sum;
    std::vector<std::size_t> order(allocs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (allocs[a].remainder != allocs[b].remainder)
        return allocs[a].remainder > allocs[b].remainder;
      return allocs[a].user < allocs[b].user;
    });
    // First pass by remainder, further passes by user id until the budget is
    // met or no capacity is left.
    while (remaining > 0) {
      bool progressed = false;
      for (std::size_t idx : order) {
        if (remaining == 0) break;
        if (allocs[idx].base + give[idx] < allocs[idx].cap) {
          ++give[idx];
          --remaining;
          progressed = true;
        }
      }
      if (!progressed) break;  // infeasible budget; accept the closest split
    }
  }

  RngStream root(seed);
  std::vector<RatingEvent> train_events, test_events;
  for (std::size_t i = 0; i < allocs.size(); ++i) {
    auto& evs = per_user[allocs[i].user];
    std::sort(evs.begin(), evs.end(),
              [](const RatingEvent& a, const RatingEvent& b) { return a.content_id < b.content_id; });
    RngStream user_rng = root.fork(static_cast<std::uint64_t>(allocs[i].user));
    user_rng.shuffle(evs);
    const std::size_t n_test = allocs[i].base + give[i];
    for (std::size_t k = 0; k < evs.size(); ++k)
      (k < n_test ? test_events : train_events).push_back(evs[k]);
  }

  std::vector<long> users;
  users.reserve(per_user.size());
  for (const auto& [user, evs] : per_user) users.push_back(user);
  const std::vector<long> content_ids(contents.begin(), contents.end());

  SplitPair pair;
  pair.seed = seed;
  pair.train = RatingMatrix::from_events_with_catalog(train_events, users, content_ids);
  pair.test = RatingMatrix::from_events_with_catalog(test_events, users, content_ids);
  return pair;
}

std::pair<std::vector<RatingMatrix>, ShardManifest> shard(const RatingMatrix& x, int n,
                                                          std::uint64_t seed) {
  if (n <= 0) throw ConfigError("shard: MEN count must be positive, got " + std::to_string(n));
  if (x.user_count() < static_cast<std::size_t>(n))
    throw ConfigError("shard: fewer users (" + std::to_string(x.user_count()) +
                      ") than MENs (" + std::to_string(n) + ")");

  std::vector<long> users = x.user_ids();
  RngStream rng = RngStream(seed).fork(fork_tag(stream_kind::shard, 0));
  rng.shuffle(users);

  ShardManifest manifest;
  for (std::size_t i = 0; i < users.size(); ++i)
    manifest.users_of_men[static_cast<int>(i % n) + 1].push_back(users[i]);
  for (auto& [men, list] : manifest.users_of_men) std::sort(list.begin(), list.end());

  std::vector<RatingMatrix> shards;
  shards.reserve(n);
  for (int men = 1; men <= n; ++men) shards.push_back(x.select_users(manifest.users_of_men[men]));
  return {std::move(shards), std::move(manifest)};
}

std::vector<RatingEvent> synth_zipf(std::size_t users, std::size_t contents, double density,
                                    double zipf_exponent, std::uint64_t seed) {
  if (users == 0 || contents == 0) throw ConfigError("synth_zipf: users and contents must be > 0");
  if (density <= 0.0 || density > 1.0) throw ConfigError("synth_zipf: density must be in (0,1]");
  if (zipf_exponent < 0.0) throw ConfigError("synth_zipf: exponent must be >= 0");

  std::vector<double> weight(contents);
  double w_max = 0.0;
  for (std::size_t c = 0; c < contents; ++c) {
    weight[c] = std::pow(static_cast<double>(c + 1), -zipf_exponent);
    w_max = std::max(w_max, weight[c]);
  }

  const auto per_user = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(density * static_cast<double>(contents))));

  RngStream rng = RngStream(seed).fork(fork_tag(stream_kind::synth, 0));
  std::vector<RatingEvent> events;
  events.reserve(users * per_user);
  long ts = 0;
  std::vector<double> w(contents);
  for (std::size_t u = 1; u <= users; ++u) {
    w = weight;
    double w_sum = 0.0;
    for (double v : w) w_sum += v;
    for (std::size_t k = 0; k < per_user; ++k) {
      // Weighted draw without replacement.
      double x = rng.next_double() * w_sum;
      std::size_t c = 0;
      for (; c + 1 < contents; ++c) {
        if (x < w[c]) break;
        x -= w[c];
      }
      while (w[c] == 0.0 && c > 0) --c;  // numeric edge at the tail
      w_sum -= w[c];
      w[c] = 0.0;

      const double pop = weight[c] / w_max;  // in (0,1], 1 = most popular
      double r = 1.0 + static_cast<double>(rng.next_below(3));
      if (rng.next_double() < pop) r += 1.0;
      if (rng.next_double() < 0.5 * pop) r += 1.0;
      events.push_back({static_cast<long>(u), static_cast<long>(c + 1), std::min(r, 5.0), ts++});
    }
  }
  return events;
}

}  // namespace edgecache
