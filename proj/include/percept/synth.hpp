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

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "percept/atlas.hpp"
#include "percept/wire.hpp"

namespace percept::synth {

struct IntraClassSpec {
  std::string tag;
  std::set<std::size_t> signature_neurons;
  double signature_shift = 0.0;

  friend bool operator==(const IntraClassSpec&, const IntraClassSpec&) = default;
};

struct ClassSpec {
  std::string label;
  std::vector<IntraClassSpec> intra_classes;

  friend bool operator==(const ClassSpec&, const ClassSpec&) = default;
};

enum class Background { kNormal, kBimodal };

struct SynthSpec {
  std::vector<ClassSpec> classes;
  std::size_t neurons = 0;
  std::size_t train_per_intra = 0;
  std::size_t test_per_intra = 0;
  double base_mean = 0.0;
  double base_variance = 1.0;
  Background background = Background::kNormal;
  // Offset of the second background mode in kBimodal.
  double bimodal_shift = 4.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

// Throws Error(kSpec) on overlapping signature sets, out-of-range neurons,
// duplicate labels, or non-positive sizes.
void ValidateSpec(const SynthSpec& spec);

// Line-oriented spec text:
//
//   seed = 7
//   neurons = 200
//   train_per_intra = 100
//   test_per_intra = 50
//   base_mean = 0
//   base_variance = 1
//   background = normal          # or: bimodal
//   bimodal_shift = 4
//
//   [class positive]
//   intra stripes  neurons=0-39      shift=10
//   intra sphere   neurons=40-79,95  shift=10
//
// Throws Error(kSpec) with the offending line number.
SynthSpec ParseSpec(const std::string& text);
SynthSpec LoadSpec(const std::string& path);
std::string FormatSpec(const SynthSpec& spec);

struct GeneratedClass {
  ActivationDump train;
  ActivationDump test;
};

struct Generated {
  std::vector<GeneratedClass> classes;
  // sample_id -> {class, split, intra}, in generation order.
  std::vector<std::pair<std::string, SampleMetadata>> metadata;
};

// Deterministic given the spec (including its seed); single-threaded.
Generated Generate(const SynthSpec& spec);

// Writes <label>.train.pcact, <label>.test.pcact and meta.tsv.
void WriteGenerated(const Generated& generated, const std::string& out_dir);

// Portable normal sampler on top of std::mt19937_64 (whose output sequence
// is fixed by the standard), so generated bytes match across platforms.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed);

  double Uniform();  // [0, 1)
  double Normal(double mean, double variance);
  std::uint64_t Below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace percept::synth
