/*
 * Copyright 2026 The Percept Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "percept/atlas.hpp"
#include "percept/encoder.hpp"

namespace percept {

inline constexpr int kDefaultNeighbors = 5;

// Throws Error(kComparison) unless both codes come from the same bank
// (equal class label and length).
void CheckComparable(const PerceptualCode& a, const PerceptualCode& b);

// popcount(a XOR b) over packed words.
std::uint64_t Hamming(const PerceptualCode& a, const PerceptualCode& b);
std::uint64_t Hamming(const BitCode& a, const BitCode& b);

// Sum of weights[i] over bits where a and b differ, accumulated in ascending
// bit order.
double WeightedHamming(const PerceptualCode& a, const PerceptualCode& b,
                       std::span<const double> weights);
double WeightedHamming(const BitCode& a, const BitCode& b,
                       std::span<const double> weights);

// Maps the atlas' per-bit popularity counts to distance weights.
//   kIdentity:   w
//   kInverse:    1 / (1 + w)
//   kLogInverse: log((K + 1) / (w + 1))
enum class WeightTransform { kIdentity, kInverse, kLogInverse };

std::string ToString(WeightTransform t);
WeightTransform ParseWeightTransform(const std::string& text);

std::vector<double> TransformWeights(std::span<const std::uint64_t> counts,
                                     std::size_t atlas_size,
                                     WeightTransform transform);

struct QueryOptions {
  int k = kDefaultNeighbors;
  bool weighted = false;
  WeightTransform transform = WeightTransform::kIdentity;
  // Skip atlas entries whose sample_id equals the query's (leave-one-out).
  bool exclude_self = false;
};

struct Neighbor {
  std::string sample_id;
  double distance = 0.0;
  SampleMetadata metadata;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct QueryResult {
  std::string query_id;
  bool weighted = false;
  std::vector<Neighbor> neighbors;  // (distance, sample_id) ascending
};

// Exact k-nearest-neighbour scan. Entries are sharded across threads, each
// shard keeps a bounded top-k, and the shards are merged. Ties are broken by
// ascending sample_id.
QueryResult Query(const Atlas& atlas, const PerceptualCode& code,
                  const QueryOptions& options = {});

// Same as Query but with precomputed distance weights (from TransformWeights)
// so repeated queries skip the transform.
QueryResult Query(const Atlas& atlas, const PerceptualCode& code,
                  const QueryOptions& options,
                  std::span<const double> weights);

}  // namespace percept
