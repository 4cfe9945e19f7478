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

// Serial reference implementations of the parallel kernels. They are written
// independently of the production paths (plain loops, no packing tricks, no
// sharding) and exist for tests and benchmarks only; nothing in the library
// or CLI links against them.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "percept/atlas.hpp"
#include "percept/encoder.hpp"
#include "percept/gmm.hpp"
#include "percept/histogram.hpp"
#include "percept/metrics.hpp"
#include "percept/retrieval.hpp"

namespace percept::reference {

// Bin assignment by linear search over the edges.
std::vector<NeuronHistogram> BuildHistograms(const ActivationMatrix& activations,
                                             int bins);

// Neuron-by-neuron loop over FitGmm.
std::vector<NeuronGmm> FitAll(const std::vector<NeuronHistogram>& histograms,
                              int components, const EmConfig& config);

// Literal per-bit evaluation of the interval rule, no lookup table.
bool EncodeBit(double value, const GmmComponent& component, IntervalMode mode);
std::vector<bool> EncodeBits(std::span<const double> activations,
                             const ClassBank& bank, IntervalMode mode);
std::vector<PerceptualCode> EncodeDump(const ActivationDump& dump,
                                       const ClassBank& bank, IntervalMode mode);

// Bit-by-bit loops.
std::uint64_t Hamming(const BitCode& a, const BitCode& b);
double WeightedHamming(const BitCode& a, const BitCode& b,
                       std::span<const double> weights);

// Per-column recount of the code matrix.
std::vector<std::uint64_t> ColumnCounts(const std::vector<BitCode>& codes);

// Distance to every entry, full sort on (distance, sample_id), truncate.
QueryResult Query(const Atlas& atlas, const PerceptualCode& code,
                  const QueryOptions& options);

// Serial loop over queries.
EvalReport Evaluate(const Atlas& atlas,
                    const std::vector<PerceptualCode>& test_codes,
                    const IntraLookup& intra_of, const QueryOptions& options);

}  // namespace percept::reference
