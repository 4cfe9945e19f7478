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
#include <string>
#include <vector>

#include "json.hpp"
#include "percept/histogram.hpp"

namespace percept {

inline constexpr int kDefaultComponents = 2;
inline constexpr double kDefaultRelevancyScale = 1.0;

struct EmConfig {
  // Stop once |LL_new - LL_old| < tolerance * |LL_old|.
  double tolerance = 1e-6;
  int max_iters = 200;
  // Keep the log-likelihood of every iteration in NeuronGmm::trace.
  bool record_trace = false;
};

struct GmmComponent {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  bool relevant = false;

  friend bool operator==(const GmmComponent&, const GmmComponent&) = default;
};

struct NeuronGmm {
  std::size_t neuron_index = 0;
  std::vector<GmmComponent> components;  // ascending mean
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  // Fitted from a single occupied bin: one effective component, the rest
  // carry zero weight.
  bool degenerate = false;
  std::vector<double> trace;

  friend bool operator==(const NeuronGmm&, const NeuronGmm&) = default;
};

struct ClassBank {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string class_label;
  std::size_t components_per_neuron = kDefaultComponents;
  std::vector<NeuronGmm> neuron_gmms;
  double peak_mean = 0.0;
  double relevancy_scale = kDefaultRelevancyScale;

  std::size_t neuron_count() const { return neuron_gmms.size(); }
  std::size_t code_length() const {
    return neuron_gmms.size() * components_per_neuron;
  }

  friend bool operator==(const ClassBank&, const ClassBank&) = default;
};

// Smallest variance a component may take on a histogram of the given range.
double VarianceFloor(double range);

// Weighted EM over (bin center, count) pairs. Deterministic: components are
// initialised at evenly spaced weighted quantiles with the pooled variance
// and uniform weights.
NeuronGmm FitGmm(const NeuronHistogram& hist, int components,
                 const EmConfig& config = {});

// Density of a component at its own mean, 1 / sqrt(2 pi variance).
double PeakValue(const GmmComponent& component);
double PeakValue(double variance);

// Mean of PeakValue over every component of the bank.
double MeanPeak(const ClassBank& bank);

// Marks each component relevant iff its peak exceeds q times the bank-wide
// mean peak. Pure: returns an updated copy.
ClassBank MarkRelevancy(ClassBank bank, double q);

struct FitOptions {
  int bins = kDefaultBins;
  int components = kDefaultComponents;
  double q = kDefaultRelevancyScale;
  EmConfig em;
};

// Fits every neuron in parallel (no relevancy marking).
std::vector<NeuronGmm> FitAll(const std::vector<NeuronHistogram>& histograms,
                              int components, const EmConfig& config);

// Histograms, per-neuron fits, and relevancy marking in one call.
ClassBank FitClassBank(const ActivationDump& dump, const FitOptions& options);

// Throws Error(kCorruption / kValidation) if the bank violates its invariants.
void ValidateBank(const ClassBank& bank);

void SaveBank(const ClassBank& bank, const nlohmann::json& config,
              const std::string& path);
ClassBank LoadBank(const std::string& path);

}  // namespace percept
