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

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "percept/atlas.hpp"
#include "percept/retrieval.hpp"

namespace percept {

// Position-discounted share of the basis sharing the query's intra-class:
// sum over i = 1..n of [basis[i-1] == query] / 2^i. A basis shorter than k
// only sums the positions it has.
double PredictionBasisAccuracy(const std::string& query_intra,
                               const std::vector<std::string>& basis_intras);

// 1 - 2^-k, the value reached when every position matches.
double MaxPredictionBasisAccuracy(int k);

struct QueryScore {
  std::string query_id;
  double p_acc = 0.0;
};

struct EvalReport {
  std::vector<QueryScore> per_query;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for n < 2
  int k = 0;
  std::map<std::string, std::string> scenario;
};

using IntraLookup = std::unordered_map<std::string, std::string>;

// Pulls `key` out of every row of a metadata table.
IntraLookup IntraTags(const MetadataTable& table,
                      const std::string& key = "intra");

// Queries the atlas with every test code (self-excluded) and scores each
// basis. Queries run in parallel. Missing intra tags throw Error(kMetadata)
// naming the sample.
EvalReport Evaluate(const Atlas& atlas,
                    const std::vector<PerceptualCode>& test_codes,
                    const IntraLookup& intra_of, const QueryOptions& options);

void WriteReportTsv(const EvalReport& report, const nlohmann::json& config,
                    const std::string& path);

}  // namespace percept
