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

#include "percept/config.hpp"

namespace percept {

FitOptions PipelineConfig::fit_options() const {
  FitOptions o;
  o.bins = bins;
  o.components = components;
  o.q = q;
  o.em.tolerance = tolerance;
  o.em.max_iters = max_iters;
  return o;
}

QueryOptions PipelineConfig::query_options() const {
  QueryOptions o;
  o.k = k;
  o.weighted = weighted;
  o.transform = weight_transform;
  return o;
}

nlohmann::json PipelineConfig::ToJson() const {
  return {{"bins", bins},
          {"components", components},
          {"q", q},
          {"tolerance", tolerance},
          {"max_iters", max_iters},
          {"interval_mode", interval_mode.ToString()},
          {"k", k},
          {"weighted", weighted},
          {"weight_transform", ToString(weight_transform)},
          {"seed", seed}};
}

PipelineConfig PipelineConfig::FromJson(const nlohmann::json& json) {
  PipelineConfig c;
  if (!json.is_object()) return c;
  c.bins = json.value("bins", c.bins);
  c.components = json.value("components", c.components);
  c.q = json.value("q", c.q);
  c.tolerance = json.value("tolerance", c.tolerance);
  c.max_iters = json.value("max_iters", c.max_iters);
  if (json.contains("interval_mode")) {
    c.interval_mode = IntervalMode::Parse(json.at("interval_mode").get<std::string>());
  }
  c.k = json.value("k", c.k);
  c.weighted = json.value("weighted", c.weighted);
  if (json.contains("weight_transform")) {
    c.weight_transform = ParseWeightTransform(json.at("weight_transform").get<std::string>());
  }
  c.seed = json.value("seed", c.seed);
  return c;
}

}  // namespace percept
