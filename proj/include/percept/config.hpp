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
#include <string>

#include "json.hpp"
#include "percept/encoder.hpp"
#include "percept/gmm.hpp"
#include "percept/histogram.hpp"
#include "percept/retrieval.hpp"

namespace percept {

// Hyper-parameters of the whole pipeline. Every artifact embeds the config
// that produced it under the "config" metadata key.
struct PipelineConfig {
  int bins = kDefaultBins;
  int components = kDefaultComponents;
  double q = kDefaultRelevancyScale;
  double tolerance = 1e-6;
  int max_iters = 200;
  IntervalMode interval_mode;
  int k = kDefaultNeighbors;
  bool weighted = false;
  WeightTransform weight_transform = WeightTransform::kIdentity;
  std::uint64_t seed = 0;

  FitOptions fit_options() const;
  QueryOptions query_options() const;

  nlohmann::json ToJson() const;
  // Reads the keys ToJson writes; missing keys keep their defaults.
  static PipelineConfig FromJson(const nlohmann::json& json);

  friend bool operator==(const PipelineConfig&,
                         const PipelineConfig&) = default;
};

}  // namespace percept
