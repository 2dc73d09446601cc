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

#ifndef EDGECACHE_RNG_HPP
#define EDGECACHE_RNG_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "edgecache/errors.hpp"

namespace edgecache {

// SplitMix64 finalizer; used to derive child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Composes a (kind, index) pair into a single fork tag.
inline std::uint64_t fork_tag(std::uint64_t kind, std::uint64_t index) {
  return (kind << 32) | (index & 0xffffffffULL);
}

// Deterministic random stream around std::mt19937_64. The raw 64-bit output
// sequence of mt19937_64 is fixed by the C++ standard, and all derived draws
// (doubles, bounded ints, shuffles) below are implemented on top of it, so a
// given seed yields the same sequence on every platform. Distribution classes
// from <random> are deliberately not used: their output is
// implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound); unbiased via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw ContractError("RngStream::next_below: bound must be > 0");
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // New independent stream derived from this stream's construction seed and a
  // tag. Forking does not consume or depend on the draw position, so sibling
  // streams are identical no matter when they are forked.
  RngStream fork(std::uint64_t tag) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(tag ^ 0x5851f42d4c957f2dULL)));
  }

  // Fisher-Yates shuffle driven by this stream.
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Stream kinds used with fork_tag across the library; kept in one place so
// sub-streams never collide.
namespace stream_kind {
inline constexpr std::uint64_t init = 1;       // model weight initialization
inline constexpr std::uint64_t shuffle = 2;    // per-worker epoch shuffles
inline constexpr std::uint64_t dropout = 3;    // per-worker dropout masks
inline constexpr std::uint64_t split = 4;      // train/test split
inline constexpr std::uint64_t shard = 5;      // user -> MEN assignment
inline constexpr std::uint64_t method = 6;     // per-method experiment seeds
inline constexpr std::uint64_t synth = 7;      // synthetic workload generation
inline constexpr std::uint64_t baseline = 8;   // baseline factor initialization
}  // namespace stream_kind

}  // namespace edgecache

#endif  // EDGECACHE_RNG_HPP
