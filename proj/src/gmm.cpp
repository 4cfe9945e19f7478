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

#include "percept/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "parallel_for.hpp"
#include "percept/container.hpp"
#include "percept/error.hpp"

namespace percept {

using container::ByteReader;
using container::ByteWriter;
using container::Json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogNormal(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(kTwoPi * variance) + d * d / variance);
}

// Occupied bins as (center, count) pairs.
struct WeightedPoints {
  std::vector<double> x;
  std::vector<double> n;
  double total = 0.0;
};

WeightedPoints OccupiedBins(const NeuronHistogram& hist) {
  WeightedPoints pts;
  for (std::size_t b = 0; b < hist.bins(); ++b) {
    if (hist.counts[b] == 0) continue;
    pts.x.push_back(hist.center(b));
    pts.n.push_back(static_cast<double>(hist.counts[b]));
    pts.total += static_cast<double>(hist.counts[b]);
  }
  return pts;
}

// Quantile of the histogram with linear interpolation inside the bin that
// crosses the target mass.
double WeightedQuantile(const NeuronHistogram& hist, double p) {
  const double target = p * static_cast<double>(hist.total);
  double cum = 0.0;
  for (std::size_t b = 0; b < hist.bins(); ++b) {
    const double c = static_cast<double>(hist.counts[b]);
    if (c == 0.0) continue;
    if (cum + c >= target) {
      const double frac = (target - cum) / c;
      return hist.bin_edges[b] + frac * (hist.bin_edges[b + 1] - hist.bin_edges[b]);
    }
    cum += c;
  }
  return hist.bin_edges.back();
}

void SortCanonical(std::vector<GmmComponent>& components) {
  std::stable_sort(components.begin(), components.end(),
                   [](const GmmComponent& a, const GmmComponent& b) {
                     if (a.mean != b.mean) return a.mean < b.mean;
                     if (a.weight != b.weight) return a.weight > b.weight;
                     return a.variance < b.variance;
                   });
}

// Fills responsibilities (row-major, points x components) and returns the
// weighted log-likelihood of the current parameters.
double ExpectationStep(const WeightedPoints& pts,
                       const std::vector<GmmComponent>& comps,
                       std::vector<double>& resp) {
  const std::size_t t_count = comps.size();
  std::vector<double> log_w(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    log_w[t] = comps[t].weight > 0.0 ? std::log(comps[t].weight) : kNegInf;
  }
  double ll = 0.0;
  for (std::size_t p = 0; p < pts.x.size(); ++p) {
    double* r = &resp[p * t_count];
    double peak = kNegInf;
    for (std::size_t t = 0; t < t_count; ++t) {
      r[t] = log_w[t] == kNegInf
                 ? kNegInf
                 : log_w[t] + LogNormal(pts.x[p], comps[t].mean, comps[t].variance);
      peak = std::max(peak, r[t]);
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) sum += std::exp(r[t] - peak);
    const double lse = peak + std::log(sum);
    for (std::size_t t = 0; t < t_count; ++t) r[t] = std::exp(r[t] - lse);
    ll += pts.n[p] * lse;
  }
  return ll;
}

void MaximizationStep(const WeightedPoints& pts, const std::vector<double>& resp,
                      double variance_floor, std::vector<GmmComponent>& comps) {
  const std::size_t t_count = comps.size();
  for (std::size_t t = 0; t < t_count; ++t) {
    double mass = 0.0;
    double first = 0.0;
    for (std::size_t p = 0; p < pts.x.size(); ++p) {
      const double w = pts.n[p] * resp[p * t_count + t];
      mass += w;
      first += w * pts.x[p];
    }
    if (mass <= 1e-12 * pts.total) {
      // Starved component: drop its weight, keep its location.
      comps[t].weight = 0.0;
      continue;
    }
    const double mean = first / mass;
    double second = 0.0;
    for (std::size_t p = 0; p < pts.x.size(); ++p) {
      const double d = pts.x[p] - mean;
      second += pts.n[p] * resp[p * t_count + t] * d * d;
    }
    comps[t].weight = mass / pts.total;
    comps[t].mean = mean;
    comps[t].variance = std::max(variance_floor, second / mass);
  }
  double sum = 0.0;
  for (const auto& c : comps) sum += c.weight;
  for (auto& c : comps) c.weight /= sum;
}

}  // namespace

double VarianceFloor(double range) {
  const double scaled = 1e-3 * range;
  return std::max(1e-6, scaled * scaled);
}

double PeakValue(double variance) { return 1.0 / std::sqrt(kTwoPi * variance); }

double PeakValue(const GmmComponent& component) {
  return PeakValue(component.variance);
}

NeuronGmm FitGmm(const NeuronHistogram& hist, int components,
                 const EmConfig& config) {
  if (components < 1) {
    throw Error(ErrorKind::kParameter, "component count must be >= 1, got " +
                                           std::to_string(components));
  }
  if (hist.total == 0 || hist.bins() == 0) {
    throw Error(ErrorKind::kInsufficientData,
                "empty histogram for neuron " + std::to_string(hist.neuron_index));
  }
  const auto t_count = static_cast<std::size_t>(components);
  const double floor = VarianceFloor(hist.range());
  const WeightedPoints pts = OccupiedBins(hist);

  NeuronGmm gmm;
  gmm.neuron_index = hist.neuron_index;

  if (pts.x.size() == 1) {
    const double mean = hist.degenerate ? hist.observed_min : pts.x.front();
    gmm.components.assign(t_count, GmmComponent{0.0, mean, floor, false});
    gmm.components.front().weight = 1.0;
    gmm.degenerate = true;
    gmm.converged = true;
    gmm.log_likelihood = pts.total * LogNormal(pts.x.front(), mean, floor);
    if (config.record_trace) gmm.trace.push_back(gmm.log_likelihood);
    return gmm;
  }

  double mean_all = 0.0;
  for (std::size_t p = 0; p < pts.x.size(); ++p) mean_all += pts.n[p] * pts.x[p];
  mean_all /= pts.total;
  double var_all = 0.0;
  for (std::size_t p = 0; p < pts.x.size(); ++p) {
    const double d = pts.x[p] - mean_all;
    var_all += pts.n[p] * d * d;
  }
  var_all = std::max(floor, var_all / pts.total);

  auto& comps = gmm.components;
  comps.resize(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    const double p = (static_cast<double>(t) + 0.5) / static_cast<double>(t_count);
    comps[t] = GmmComponent{1.0 / static_cast<double>(t_count),
                            WeightedQuantile(hist, p), var_all, false};
  }

  std::vector<double> resp(pts.x.size() * t_count);
  double prev_ll = 0.0;
  double ll = 0.0;
  int iter = 0;
  for (;; ++iter) {
    ll = ExpectationStep(pts, comps, resp);
    if (config.record_trace) gmm.trace.push_back(ll);
    if (iter > 0) {
      const double delta = std::abs(ll - prev_ll);
      if (delta == 0.0 || delta < config.tolerance * std::abs(prev_ll)) {
        gmm.converged = true;
        break;
      }
    }
    if (iter >= config.max_iters) break;
    MaximizationStep(pts, resp, floor, comps);
    prev_ll = ll;
  }
  gmm.iterations = iter;
  gmm.log_likelihood = ll;
  SortCanonical(comps);
  return gmm;
}

std::vector<NeuronGmm> FitAll(const std::vector<NeuronHistogram>& histograms,
                              int components, const EmConfig& config) {
  std::vector<NeuronGmm> out(histograms.size());
  internal::ParallelFor(histograms.size(), [&](std::size_t j) {
    out[j] = FitGmm(histograms[j], components, config);
  });
  return out;
}

double MeanPeak(const ClassBank& bank) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& gmm : bank.neuron_gmms) {
    for (const auto& c : gmm.components) {
      sum += PeakValue(c);
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

ClassBank MarkRelevancy(ClassBank bank, double q) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw Error(ErrorKind::kParameter, "relevancy scale q must be positive");
  }
  bank.peak_mean = MeanPeak(bank);
  bank.relevancy_scale = q;
  const double threshold = q * bank.peak_mean;
  internal::ParallelFor(bank.neuron_gmms.size(), [&](std::size_t j) {
    for (auto& c : bank.neuron_gmms[j].components) {
      c.relevant = PeakValue(c) > threshold;
    }
  });
  return bank;
}

ClassBank FitClassBank(const ActivationDump& dump, const FitOptions& options) {
  ClassBank bank;
  bank.class_label = dump.class_label;
  bank.components_per_neuron = static_cast<std::size_t>(options.components);
  bank.neuron_gmms =
      FitAll(BuildHistograms(dump.values, options.bins), options.components,
             options.em);
  return MarkRelevancy(std::move(bank), options.q);
}

void ValidateBank(const ClassBank& bank) {
  const std::size_t t_count = bank.components_per_neuron;
  if (t_count == 0) throw Error(ErrorKind::kValidation, "bank has zero components per neuron");
  for (std::size_t j = 0; j < bank.neuron_gmms.size(); ++j) {
    const auto& gmm = bank.neuron_gmms[j];
    const std::string where = "neuron " + std::to_string(j);
    if (gmm.components.size() != t_count) {
      throw Error(ErrorKind::kCorruption, where + " has " +
                                              std::to_string(gmm.components.size()) +
                                              " components, expected " +
                                              std::to_string(t_count));
    }
    double wsum = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) {
      const auto& c = gmm.components[t];
      if (!(c.variance > 0.0) || !std::isfinite(c.variance) || !std::isfinite(c.mean) ||
          !(c.weight >= 0.0 && c.weight <= 1.0)) {
        throw Error(ErrorKind::kCorruption, where + " has an invalid component");
      }
      if (t > 0 && gmm.components[t - 1].mean > c.mean) {
        throw Error(ErrorKind::kCorruption, where + " components are not sorted by mean");
      }
      wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
      throw Error(ErrorKind::kCorruption, where + " weights sum to " + std::to_string(wsum));
    }
  }
  const double recomputed = MeanPeak(bank);
  if (std::abs(recomputed - bank.peak_mean) > 1e-9 * std::abs(recomputed)) {
    throw Error(ErrorKind::kCorruption, "stored peak_mean disagrees with components");
  }
  const double threshold = bank.relevancy_scale * bank.peak_mean;
  for (const auto& gmm : bank.neuron_gmms) {
    for (const auto& c : gmm.components) {
      if (c.relevant != (PeakValue(c) > threshold)) {
        throw Error(ErrorKind::kCorruption, "relevancy flags disagree with peak rule");
      }
    }
  }
}

void SaveBank(const ClassBank& bank, const Json& config, const std::string& path) {
  ValidateBank(bank);
  std::size_t relevant = 0;
  std::size_t degenerate = 0;
  ByteWriter payload;
  payload.f64(bank.peak_mean);
  payload.f64(bank.relevancy_scale);
  for (const auto& gmm : bank.neuron_gmms) {
    payload.u64(gmm.neuron_index);
    payload.f64(gmm.log_likelihood);
    payload.u32(static_cast<std::uint32_t>(gmm.iterations));
    payload.u8(gmm.converged ? 1 : 0);
    payload.u8(gmm.degenerate ? 1 : 0);
    degenerate += gmm.degenerate ? 1 : 0;
    for (const auto& c : gmm.components) {
      payload.f64(c.weight);
      payload.f64(c.mean);
      payload.f64(c.variance);
      payload.u8(c.relevant ? 1 : 0);
      relevant += c.relevant ? 1 : 0;
    }
  }
  Json meta = {{"class_label", bank.class_label},
               {"components", bank.components_per_neuron},
               {"neurons", bank.neuron_count()},
               {"code_length", bank.code_length()},
               {"peak_mean", bank.peak_mean},
               {"q", bank.relevancy_scale},
               {"relevant_components", relevant},
               {"degenerate_neurons", degenerate},
               {"config", config}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  container::WriteFrame(out, container::kBankMagic, ClassBank::kFormatVersion, meta,
                        payload.bytes());
}

ClassBank LoadBank(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  auto frame = container::ReadFrame(in, container::kBankMagic, ClassBank::kFormatVersion);
  ClassBank bank;
  std::size_t neurons = 0;
  try {
    bank.class_label = frame.metadata.at("class_label").get<std::string>();
    bank.components_per_neuron = frame.metadata.at("components").get<std::size_t>();
    neurons = frame.metadata.at("neurons").get<std::size_t>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("bank metadata: ") + e.what());
  }
  ByteReader reader(frame.payload);
  bank.peak_mean = reader.f64();
  bank.relevancy_scale = reader.f64();
  bank.neuron_gmms.resize(neurons);
  for (auto& gmm : bank.neuron_gmms) {
    gmm.neuron_index = reader.u64();
    gmm.log_likelihood = reader.f64();
    gmm.iterations = static_cast<int>(reader.u32());
    gmm.converged = reader.u8() != 0;
    gmm.degenerate = reader.u8() != 0;
    gmm.components.resize(bank.components_per_neuron);
    for (auto& c : gmm.components) {
      c.weight = reader.f64();
      c.mean = reader.f64();
      c.variance = reader.f64();
      c.relevant = reader.u8() != 0;
    }
  }
  if (reader.remaining() != 0) {
    throw Error(ErrorKind::kLengthMismatch, "trailing bytes after bank payload");
  }
  ValidateBank(bank);
  return bank;
}

}  // namespace percept
