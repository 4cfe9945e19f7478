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

#include "percept/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <omp.h>

#include "percept/error.hpp"

namespace percept {
namespace {

constexpr std::size_t kParallelScanThreshold = 4096;

void CheckWeights(std::size_t bits, std::span<const double> weights) {
  if (weights.size() != bits) {
    throw Error(ErrorKind::kDimension, "weight vector has " + std::to_string(weights.size()) +
                                           " entries for codes of length " +
                                           std::to_string(bits));
  }
}

void CheckSameLength(const BitCode& a, const BitCode& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kComparison, "cannot compare codes of length " +
                                            std::to_string(a.size()) + " and " +
                                            std::to_string(b.size()));
  }
}

std::uint64_t HammingUnchecked(const BitCode& a, const BitCode& b) {
  const auto wa = a.words();
  const auto wb = b.words();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) total += std::popcount(wa[i] ^ wb[i]);
  return total;
}

double WeightedHammingUnchecked(const BitCode& a, const BitCode& b,
                                std::span<const double> weights) {
  const auto wa = a.words();
  const auto wb = b.words();
  double total = 0.0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    for (std::uint64_t diff = wa[i] ^ wb[i]; diff != 0; diff &= diff - 1) {
      total += weights[i * BitCode::kWordBits + std::countr_zero(diff)];
    }
  }
  return total;
}

struct Candidate {
  double distance;
  std::size_t index;
};

}  // namespace

void CheckComparable(const PerceptualCode& a, const PerceptualCode& b) {
  if (a.class_label != b.class_label) {
    throw Error(ErrorKind::kComparison, "codes come from different banks: '" +
                                            a.class_label + "' vs '" + b.class_label + "'");
  }
  CheckSameLength(a.bits, b.bits);
}

std::uint64_t Hamming(const BitCode& a, const BitCode& b) {
  CheckSameLength(a, b);
  return HammingUnchecked(a, b);
}

std::uint64_t Hamming(const PerceptualCode& a, const PerceptualCode& b) {
  CheckComparable(a, b);
  return HammingUnchecked(a.bits, b.bits);
}

double WeightedHamming(const BitCode& a, const BitCode& b, std::span<const double> weights) {
  CheckSameLength(a, b);
  CheckWeights(a.size(), weights);
  return WeightedHammingUnchecked(a, b, weights);
}

double WeightedHamming(const PerceptualCode& a, const PerceptualCode& b,
                       std::span<const double> weights) {
  CheckComparable(a, b);
  CheckWeights(a.size(), weights);
  return WeightedHammingUnchecked(a.bits, b.bits, weights);
}

std::string ToString(WeightTransform t) {
  switch (t) {
    case WeightTransform::kIdentity: return "identity";
    case WeightTransform::kInverse: return "inverse";
    case WeightTransform::kLogInverse: return "log-inverse";
  }
  return "identity";
}

WeightTransform ParseWeightTransform(const std::string& text) {
  if (text == "identity") return WeightTransform::kIdentity;
  if (text == "inverse") return WeightTransform::kInverse;
  if (text == "log-inverse") return WeightTransform::kLogInverse;
  throw Error(ErrorKind::kParameter, "weight transform must be identity, inverse or "
                                     "log-inverse, got '" + text + "'");
}

std::vector<double> TransformWeights(std::span<const std::uint64_t> counts,
                                     std::size_t atlas_size, WeightTransform transform) {
  std::vector<double> out(counts.size());
  const double n = static_cast<double>(atlas_size);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double c = static_cast<double>(counts[i]);
    switch (transform) {
      case WeightTransform::kIdentity: out[i] = c; break;
      case WeightTransform::kInverse: out[i] = 1.0 / (1.0 + c); break;
      case WeightTransform::kLogInverse: out[i] = std::log((n + 1.0) / (c + 1.0)); break;
    }
  }
  return out;
}

QueryResult Query(const Atlas& atlas, const PerceptualCode& code, const QueryOptions& options) {
  if (!options.weighted) return Query(atlas, code, options, {});
  const auto weights = TransformWeights(atlas.weights, atlas.size(), options.transform);
  return Query(atlas, code, options, weights);
}

QueryResult Query(const Atlas& atlas, const PerceptualCode& code, const QueryOptions& options,
                  std::span<const double> weights) {
  if (options.k <= 0) {
    throw Error(ErrorKind::kParameter, "k must be positive, got " + std::to_string(options.k));
  }
  if (code.class_label != atlas.class_label) {
    throw Error(ErrorKind::kComparison, "query code from bank '" + code.class_label +
                                            "' cannot be compared with atlas of class '" +
                                            atlas.class_label + "'");
  }
  if (code.size() != atlas.code_length) {
    throw Error(ErrorKind::kComparison, "query code length " + std::to_string(code.size()) +
                                            " differs from atlas code length " +
                                            std::to_string(atlas.code_length));
  }
  if (options.weighted) CheckWeights(atlas.code_length, weights);

  const auto k = static_cast<std::size_t>(options.k);
  const auto& entries = atlas.entries;
  auto before = [&entries](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return entries[a.index].sample_id < entries[b.index].sample_id;
  };

  const std::size_t n = entries.size();
  std::vector<std::vector<Candidate>> shards(static_cast<std::size_t>(omp_get_max_threads()));
  const auto count = static_cast<std::ptrdiff_t>(n);

#pragma omp parallel if (n >= kParallelScanThreshold)
  {
    // Max-heap under `before`: the worst kept candidate sits on top.
    std::vector<Candidate> heap;
    heap.reserve(k + 1);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto& e = entries[static_cast<std::size_t>(i)];
      if (options.exclude_self && e.sample_id == code.sample_id) continue;
      const double d = options.weighted
                           ? WeightedHammingUnchecked(code.bits, e.code.bits, weights)
                           : static_cast<double>(HammingUnchecked(code.bits, e.code.bits));
      const Candidate c{d, static_cast<std::size_t>(i)};
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end(), before);
      } else if (before(c, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), before);
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end(), before);
      }
    }
    shards[static_cast<std::size_t>(omp_get_thread_num())] = std::move(heap);
  }

  std::vector<Candidate> merged;
  for (auto& s : shards) merged.insert(merged.end(), s.begin(), s.end());
  const std::size_t keep = std::min(k, merged.size());
  std::partial_sort(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(keep),
                    merged.end(), before);

  QueryResult result;
  result.query_id = code.sample_id;
  result.weighted = options.weighted;
  result.neighbors.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto& e = entries[merged[i].index];
    result.neighbors.push_back({e.sample_id, merged[i].distance, e.metadata});
  }
  return result;
}

}  // namespace percept
