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

#include "percept/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "parallel_for.hpp"
#include "percept/container.hpp"
#include "percept/error.hpp"

namespace percept {

using container::ByteReader;
using container::ByteWriter;
using container::Json;

namespace {

constexpr std::uint32_t kHistogramVersion = 1;

void CheckShape(const ActivationMatrix& activations, int bins) {
  if (activations.rows() < 2) {
    throw Error(ErrorKind::kInsufficientData,
                "histograms need at least 2 samples, got " +
                    std::to_string(activations.rows()));
  }
  if (bins < 2) {
    throw Error(ErrorKind::kParameter,
                "bin count must be >= 2, got " + std::to_string(bins));
  }
}

}  // namespace

std::size_t BinIndex(const std::vector<double>& edges, double value) {
  const std::size_t bins = edges.size() - 1;
  const double lo = edges.front();
  const double hi = edges.back();
  const double guess = std::floor((value - lo) / (hi - lo) * static_cast<double>(bins));
  std::size_t b = guess <= 0.0 ? 0
                  : guess >= static_cast<double>(bins - 1)
                      ? bins - 1
                      : static_cast<std::size_t>(guess);
  // The arithmetic guess can be one off near an edge; settle it against the
  // stored edges so assignment agrees with [edges[b], edges[b+1]).
  while (b > 0 && value < edges[b]) --b;
  while (b + 1 < bins && value >= edges[b + 1]) ++b;
  return b;
}

NeuronHistogram BuildColumnHistogram(const ActivationMatrix& activations,
                                     std::size_t column, int bins) {
  CheckShape(activations, bins);
  const std::size_t rows = activations.rows();

  double lo = activations(0, column);
  double hi = lo;
  for (std::size_t r = 0; r < rows; ++r) {
    const double v = activations(r, column);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kValidation,
                  "non-finite activation at row " + std::to_string(r) +
                      ", column " + std::to_string(column));
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  NeuronHistogram hist;
  hist.neuron_index = column;
  hist.observed_min = lo;
  hist.observed_max = hi;
  hist.total = rows;
  if (lo == hi) {
    hist.degenerate = true;
    lo -= 0.5;
    hi += 0.5;
  }

  const auto b_count = static_cast<std::size_t>(bins);
  hist.bin_edges.resize(b_count + 1);
  const double width = (hi - lo) / static_cast<double>(b_count);
  for (std::size_t b = 0; b < b_count; ++b) {
    hist.bin_edges[b] = lo + width * static_cast<double>(b);
  }
  hist.bin_edges[b_count] = hi;
  for (std::size_t b = 0; b < b_count; ++b) {
    if (!(hist.bin_edges[b] < hist.bin_edges[b + 1])) {
      throw Error(ErrorKind::kValidation,
                  "activation range of column " + std::to_string(column) +
                      " is too narrow for " + std::to_string(bins) + " bins");
    }
  }

  hist.counts.assign(b_count, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    ++hist.counts[BinIndex(hist.bin_edges, activations(r, column))];
  }
  return hist;
}

std::vector<NeuronHistogram> BuildHistograms(const ActivationMatrix& activations,
                                             int bins) {
  CheckShape(activations, bins);
  std::vector<NeuronHistogram> out(activations.cols());
  internal::ParallelFor(activations.cols(), [&](std::size_t j) {
    out[j] = BuildColumnHistogram(activations, j, bins);
  });
  return out;
}

void SaveHistograms(const std::vector<NeuronHistogram>& histograms,
                    const std::string& class_label, const Json& config,
                    const std::string& path) {
  const std::size_t bins = histograms.empty() ? 0 : histograms.front().bins();
  Json degenerate = Json::array();
  ByteWriter payload;
  for (const auto& h : histograms) {
    if (h.bins() != bins) {
      throw Error(ErrorKind::kConsistency, "histograms disagree on bin count");
    }
    if (h.degenerate) degenerate.push_back(h.neuron_index);
    payload.u64(h.neuron_index);
    payload.f64(h.observed_min);
    payload.f64(h.observed_max);
    payload.u8(h.degenerate ? 1 : 0);
    payload.u64(h.total);
    for (double e : h.bin_edges) payload.f64(e);
    for (std::uint64_t c : h.counts) payload.u64(c);
  }
  Json meta = {{"class_label", class_label},
               {"bins", bins},
               {"neurons", histograms.size()},
               {"degenerate_neurons", degenerate},
               {"config", config}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  container::WriteFrame(out, container::kHistogramMagic, kHistogramVersion, meta,
                        payload.bytes());
}

std::vector<NeuronHistogram> LoadHistograms(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  auto frame = container::ReadFrame(in, container::kHistogramMagic, kHistogramVersion);
  std::size_t bins = 0;
  std::size_t neurons = 0;
  try {
    bins = frame.metadata.at("bins").get<std::size_t>();
    neurons = frame.metadata.at("neurons").get<std::size_t>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("histogram metadata: ") + e.what());
  }
  ByteReader reader(frame.payload);
  std::vector<NeuronHistogram> out(neurons);
  for (auto& h : out) {
    h.neuron_index = reader.u64();
    h.observed_min = reader.f64();
    h.observed_max = reader.f64();
    h.degenerate = reader.u8() != 0;
    h.total = reader.u64();
    h.bin_edges.resize(bins + 1);
    for (double& e : h.bin_edges) e = reader.f64();
    h.counts.resize(bins);
    std::uint64_t sum = 0;
    for (std::uint64_t& c : h.counts) sum += (c = reader.u64());
    if (sum != h.total) {
      throw Error(ErrorKind::kCorruption,
                  "histogram counts of neuron " + std::to_string(h.neuron_index) +
                      " do not sum to total");
    }
  }
  if (reader.remaining() != 0) {
    throw Error(ErrorKind::kLengthMismatch, "trailing bytes after histograms");
  }
  return out;
}

}  // namespace percept
