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

#include <array>
#include <string>
#include <vector>

#include "percept/atlas.hpp"

namespace percept {

struct ProjectedPoint {
  std::string sample_id;
  double x = 0.0;
  double y = 0.0;
  std::string intra_tag;
};

struct Projection2D {
  std::vector<ProjectedPoint> points;
  // Share of total variance captured by each direction.
  std::array<double, 2> explained_variance{0.0, 0.0};
  // Absolute covariance eigenvalues (sample covariance, n - 1).
  std::array<double, 2> eigenvalues{0.0, 0.0};
  std::array<std::vector<double>, 2> component_vectors;
};

// PCA of the atlas' 0/1 code matrix down to two dimensions. Uses the K x K
// Gram matrix when K < N, otherwise the N x N covariance. Each direction is
// sign-normalised so its largest-magnitude coordinate is positive.
// Requires at least 3 entries.
Projection2D Project(const Atlas& atlas, const std::string& intra_key = "intra");

void WriteProjectionTsv(const Projection2D& projection,
                        const std::string& path);
void WriteProjectionSvg(const Projection2D& projection,
                        const std::string& path);

}  // namespace percept
