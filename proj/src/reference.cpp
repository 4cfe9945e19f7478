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

#include "percept/reference.hpp"

#include <algorithm>
#include <cmath>

#include "percept/error.hpp"

namespace percept::reference {

std::vector<NeuronHistogram> BuildHistograms(const ActivationMatrix& activations, int bins) {
  std::vector<NeuronHistogram> out;
  out.reserve(activations.cols());
  for (std::size_t j = 0; j < activations.cols(); ++j) {
    NeuronHistogram h;
    h.neuron_index = j;
    double lo = activations(0, j);
    double hi = lo;
    for (std::size_t r = 1; r < activations.rows(); ++r) {
      lo = std::min<double>(lo, activations(r, j));
      hi = std::max<double>(hi, activations(r, j));
    }
    h.observed_min = lo;
    h.observed_max = hi;
    if (lo == hi) {
      h.degenerate = true;
      lo -= 0.5;
      hi += 0.5;
    }
    const double width = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) h.bin_edges.push_back(lo + width * b);
    h.bin_edges.push_back(hi);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (std::size_t r = 0; r < activations.rows(); ++r) {
      const double v = activations(r, j);
      std::size_t b = 0;
      while (b + 1 < h.counts.size() && v >= h.bin_edges[b + 1]) ++b;
      ++h.counts[b];
    }
    h.total = activations.rows();
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<NeuronGmm> FitAll(const std::vector<NeuronHistogram>& histograms, int components,
                              const EmConfig& config) {
  std::vector<NeuronGmm> out;
  out.reserve(histograms.size());
  for (const auto& h : histograms) out.push_back(FitGmm(h, components, config));
  return out;
}

bool EncodeBit(double value, const GmmComponent& component, IntervalMode mode) {
  const double half = mode.kind == IntervalMode::Kind::kVariance
                          ? component.variance
                          : mode.k * std::sqrt(component.variance);
  return component.mean - half <= value && value <= component.mean + half &&
         component.relevant;
}

std::vector<bool> EncodeBits(std::span<const double> activations, const ClassBank& bank,
                             IntervalMode mode) {
  std::vector<bool> bits;
  for (std::size_t j = 0; j < bank.neuron_gmms.size(); ++j) {
    for (const auto& c : bank.neuron_gmms[j].components) {
      bits.push_back(EncodeBit(activations[j], c, mode));
    }
  }
  return bits;
}

std::vector<PerceptualCode> EncodeDump(const ActivationDump& dump, const ClassBank& bank,
                                       IntervalMode mode) {
  std::vector<PerceptualCode> out;
  for (std::size_t i = 0; i < dump.sample_count(); ++i) {
    const auto row = dump.values.row(i);
    const std::vector<double> values(row.begin(), row.end());
    out.push_back({BitCode::FromBools(EncodeBits(values, bank, mode)), bank.class_label,
                   dump.sample_ids[i]});
  }
  return out;
}

std::uint64_t Hamming(const BitCode& a, const BitCode& b) {
  std::uint64_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a.test(i) != b.test(i) ? 1 : 0;
  return d;
}

double WeightedHamming(const BitCode& a, const BitCode& b, std::span<const double> weights) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.test(i) != b.test(i)) d += weights[i];
  }
  return d;
}

std::vector<std::uint64_t> ColumnCounts(const std::vector<BitCode>& codes) {
  std::vector<std::uint64_t> counts(codes.empty() ? 0 : codes.front().size(), 0);
  for (std::size_t col = 0; col < counts.size(); ++col) {
    for (const auto& c : codes) counts[col] += c.test(col) ? 1 : 0;
  }
  return counts;
}

QueryResult Query(const Atlas& atlas, const PerceptualCode& code, const QueryOptions& options) {
  std::vector<double> weights;
  if (options.weighted) weights = TransformWeights(atlas.weights, atlas.size(), options.transform);
  std::vector<Neighbor> all;
  for (const auto& e : atlas.entries) {
    if (options.exclude_self && e.sample_id == code.sample_id) continue;
    const double d = options.weighted ? reference::WeightedHamming(code.bits, e.code.bits, weights)
                                      : static_cast<double>(reference::Hamming(code.bits, e.code.bits));
    all.push_back({e.sample_id, d, e.metadata});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.sample_id < b.sample_id;
  });
  if (all.size() > static_cast<std::size_t>(options.k)) all.resize(static_cast<std::size_t>(options.k));
  return {code.sample_id, options.weighted, std::move(all)};
}

EvalReport Evaluate(const Atlas& atlas, const std::vector<PerceptualCode>& test_codes,
                    const IntraLookup& intra_of, const QueryOptions& options) {
  QueryOptions loo = options;
  loo.exclude_self = true;
  EvalReport report;
  report.k = options.k;
  double sum = 0.0;
  for (const auto& code : test_codes) {
    const QueryResult result = reference::Query(atlas, code, loo);
    std::vector<std::string> basis;
    for (const auto& nb : result.neighbors) basis.push_back(intra_of.at(nb.sample_id));
    const double p = PredictionBasisAccuracy(intra_of.at(code.sample_id), basis);
    report.per_query.push_back({code.sample_id, p});
    sum += p;
  }
  const double n = static_cast<double>(test_codes.size());
  report.mean = test_codes.empty() ? 0.0 : sum / n;
  if (test_codes.size() >= 2) {
    double sq = 0.0;
    for (const auto& s : report.per_query) sq += (s.p_acc - report.mean) * (s.p_acc - report.mean);
    report.std = std::sqrt(sq / (n - 1.0));
  }
  return report;
}

}  // namespace percept::reference
