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

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "percept/bitcode.hpp"
#include "percept/gmm.hpp"
#include "percept/wire.hpp"

namespace percept {

// Half-width of a component's acceptance interval around its mean.
//   kVariance: mean +/- variance (the default)
//   kSigma:    mean +/- k * sqrt(variance)
struct IntervalMode {
  enum class Kind { kVariance, kSigma };

  Kind kind = Kind::kVariance;
  double k = 1.0;

  static IntervalMode Variance() { return {}; }
  static IntervalMode KSigma(double k) { return {Kind::kSigma, k}; }

  double HalfWidth(double variance) const;
  std::string ToString() const;
  static IntervalMode Parse(const std::string& text);

  friend bool operator==(const IntervalMode&, const IntervalMode&) = default;
};

struct PerceptualCode {
  BitCode bits;
  std::string class_label;
  std::string sample_id;

  std::size_t size() const { return bits.size(); }

  friend bool operator==(const PerceptualCode&,
                         const PerceptualCode&) = default;
};

// Per-bank lookup table of acceptance intervals. Bit j*T + t is set iff the
// activation of neuron j lies in [lo, hi] of component t and the component is
// relevant.
class Encoder {
 public:
  Encoder(const ClassBank& bank, IntervalMode mode = {});

  PerceptualCode Encode(std::span<const double> activations,
                        std::string sample_id) const;
  PerceptualCode Encode(std::span<const float> activations,
                        std::string sample_id) const;

  // One code per row, in row order. Rows are encoded in parallel.
  std::vector<PerceptualCode> EncodeDump(const ActivationDump& dump) const;

  std::size_t neuron_count() const { return neurons_; }
  std::size_t code_length() const { return neurons_ * components_; }
  const std::string& class_label() const { return class_label_; }

 private:
  struct Interval {
    double lo;
    double hi;
    bool relevant;
  };

  template <typename T>
  PerceptualCode EncodeImpl(std::span<const T> activations,
                            std::string sample_id) const;

  std::string class_label_;
  std::size_t neurons_ = 0;
  std::size_t components_ = 0;
  std::vector<Interval> intervals_;  // neuron-major
};

inline PerceptualCode Encode(std::span<const double> activations,
                             const ClassBank& bank, std::string sample_id,
                             IntervalMode mode = {}) {
  return Encoder(bank, mode).Encode(activations, std::move(sample_id));
}

// Samples are encoded with the bank of their (predicted) class, so
// dump.class_label must equal bank.class_label; a mismatch throws
// Error(kComparison) naming both labels.
std::vector<PerceptualCode> EncodeDump(const ActivationDump& dump,
                                       const ClassBank& bank,
                                       IntervalMode mode = {});

struct CodeSet {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string class_label;
  std::size_t code_length = 0;
  std::size_t components_per_neuron = 0;
  std::vector<PerceptualCode> codes;
};

void SaveCodes(const CodeSet& codes, const nlohmann::json& config,
               const std::string& path);
CodeSet LoadCodes(const std::string& path);

}  // namespace percept
