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
#include <string>
#include <vector>

#include "json.hpp"
#include "percept/wire.hpp"

namespace percept {

inline constexpr int kDefaultBins = 64;

// Equal-width histogram of one neuron's activations over [min, max].
struct NeuronHistogram {
  std::size_t neuron_index = 0;
  std::vector<double> bin_edges;       // B + 1, strictly increasing
  std::vector<std::uint64_t> counts;   // B
  std::uint64_t total = 0;
  double observed_min = 0.0;
  double observed_max = 0.0;
  // max == min; edges were expanded to [v - 0.5, v + 0.5].
  bool degenerate = false;

  std::size_t bins() const { return counts.size(); }
  double range() const { return bin_edges.back() - bin_edges.front(); }
  double center(std::size_t b) const {
    return 0.5 * (bin_edges[b] + bin_edges[b + 1]);
  }

  friend bool operator==(const NeuronHistogram&,
                         const NeuronHistogram&) = default;
};

// Index of the bin that holds `value`: bin b covers [edges[b], edges[b+1]),
// except the last bin which also includes its right edge. `value` must lie
// within [edges.front(), edges.back()].
std::size_t BinIndex(const std::vector<double>& edges, double value);

// Builds one histogram per column, in parallel across columns.
// Requires rows >= 2 and bins >= 2.
std::vector<NeuronHistogram> BuildHistograms(const ActivationMatrix& activations,
                                             int bins = kDefaultBins);

// Histogram of a single column; BuildHistograms runs this per neuron.
NeuronHistogram BuildColumnHistogram(const ActivationMatrix& activations,
                                     std::size_t column, int bins);

void SaveHistograms(const std::vector<NeuronHistogram>& histograms,
                    const std::string& class_label,
                    const nlohmann::json& config, const std::string& path);
std::vector<NeuronHistogram> LoadHistograms(const std::string& path);

}  // namespace percept
