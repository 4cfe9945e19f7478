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

#include "percept/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "parallel_for.hpp"
#include "percept/error.hpp"

namespace percept {
namespace {

const std::string& LookupIntra(const IntraLookup& intra_of, const std::string& sample_id) {
  auto it = intra_of.find(sample_id);
  if (it == intra_of.end()) {
    throw Error(ErrorKind::kMetadata, "no intra-class tag for sample '" + sample_id + "'");
  }
  return it->second;
}

std::string FormatReal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

}  // namespace

double PredictionBasisAccuracy(const std::string& query_intra,
                               const std::vector<std::string>& basis_intras) {
  double score = 0.0;
  for (std::size_t i = 0; i < basis_intras.size(); ++i) {
    if (basis_intras[i] == query_intra) score += std::ldexp(1.0, -static_cast<int>(i + 1));
  }
  return score;
}

double MaxPredictionBasisAccuracy(int k) { return 1.0 - std::ldexp(1.0, -k); }

IntraLookup IntraTags(const MetadataTable& table, const std::string& key) {
  IntraLookup out;
  for (const auto& [id, meta] : table) {
    if (auto it = meta.find(key); it != meta.end()) out.emplace(id, it->second);
  }
  return out;
}

EvalReport Evaluate(const Atlas& atlas, const std::vector<PerceptualCode>& test_codes,
                    const IntraLookup& intra_of, const QueryOptions& options) {
  for (const auto& e : atlas.entries) LookupIntra(intra_of, e.sample_id);
  for (const auto& c : test_codes) LookupIntra(intra_of, c.sample_id);

  QueryOptions per_query = options;
  per_query.exclude_self = true;
  std::vector<double> weights;
  if (options.weighted) {
    weights = TransformWeights(atlas.weights, atlas.size(), options.transform);
  }

  EvalReport report;
  report.k = options.k;
  report.per_query.resize(test_codes.size());
  internal::ParallelFor(test_codes.size(), [&](std::size_t i) {
    const auto& code = test_codes[i];
    const QueryResult result = Query(atlas, code, per_query, weights);
    std::vector<std::string> basis;
    basis.reserve(result.neighbors.size());
    for (const auto& nb : result.neighbors) basis.push_back(LookupIntra(intra_of, nb.sample_id));
    report.per_query[i] = {code.sample_id,
                           PredictionBasisAccuracy(LookupIntra(intra_of, code.sample_id), basis)};
  });

  const double n = static_cast<double>(report.per_query.size());
  double sum = 0.0;
  for (const auto& s : report.per_query) sum += s.p_acc;
  report.mean = report.per_query.empty() ? 0.0 : sum / n;
  if (report.per_query.size() >= 2) {
    double sq = 0.0;
    for (const auto& s : report.per_query) sq += (s.p_acc - report.mean) * (s.p_acc - report.mean);
    report.std = std::sqrt(sq / (n - 1.0));
  }
  report.scenario = {{"class_label", atlas.class_label},
                     {"atlas_size", std::to_string(atlas.size())},
                     {"queries", std::to_string(test_codes.size())},
                     {"k", std::to_string(options.k)},
                     {"weighted", options.weighted ? "true" : "false"},
                     {"weight_transform", ToString(options.transform)}};
  return report;
}

void WriteReportTsv(const EvalReport& report, const nlohmann::json& config,
                    const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path + " for writing");
  out << "# percept eval report\n";
  out << "# config\t" << config.dump() << '\n';
  for (const auto& [k, v] : report.scenario) out << "# " << k << '\t' << v << '\n';
  out << "query_id\tp_acc\n";
  for (const auto& s : report.per_query) out << s.query_id << '\t' << FormatReal(s.p_acc) << '\n';
  out << "# mean\t" << FormatReal(report.mean) << '\n';
  out << "# std\t" << FormatReal(report.std) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write to " + path + " failed");
}

}  // namespace percept
