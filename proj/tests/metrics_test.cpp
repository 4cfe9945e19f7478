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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "percept/metrics.hpp"
#include "percept/reference.hpp"
#include "test_util.hpp"

namespace percept {
namespace {

using percept_test::CodeFromString;
using percept_test::Rng;

std::vector<std::string> Tags(const std::string& letters) {
  std::vector<std::string> out;
  for (char c : letters) out.emplace_back(1, c);
  return out;
}

TEST(PredictionBasisAccuracyTest, Examples) {
  EXPECT_DOUBLE_EQ(PredictionBasisAccuracy("a", Tags("aaa")), 0.875);
  EXPECT_DOUBLE_EQ(PredictionBasisAccuracy("a", Tags("abb")), 0.5);
  EXPECT_DOUBLE_EQ(PredictionBasisAccuracy("a", Tags("babab")), 0.3125);
  EXPECT_DOUBLE_EQ(PredictionBasisAccuracy("a", {}), 0.0);
  EXPECT_DOUBLE_EQ(MaxPredictionBasisAccuracy(3), 0.875);
  EXPECT_DOUBLE_EQ(MaxPredictionBasisAccuracy(5), 1.0 - 1.0 / 32.0);
}

TEST(PredictionBasisAccuracyTest, MatchesDirectFormula) {
  Rng rng(61);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = static_cast<int>(rng.Int(1, 30));
    const int groups = static_cast<int>(rng.Int(1, 4));
    std::vector<std::string> basis;
    for (int i = 0; i < k; ++i) basis.push_back(std::to_string(rng.Int(0, groups - 1)));
    const std::string query = std::to_string(rng.Int(0, groups - 1));
    double want = 0;
    for (int i = 1; i <= k; ++i) {
      if (basis[static_cast<std::size_t>(i - 1)] == query) want += 1.0 / std::pow(2.0, i);
    }
    const double got = PredictionBasisAccuracy(query, basis);
    EXPECT_NEAR(got, want, 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, MaxPredictionBasisAccuracy(k));
    EXPECT_LT(got, 1.0);
  }
}

TEST(PredictionBasisAccuracyTest, MaximumOnlyWhenAllMatch) {
  Rng rng(62);
  for (int trial = 0; trial < 500; ++trial) {
    const auto k = static_cast<std::size_t>(rng.Int(1, 12));
    std::vector<std::string> basis(k, "a");
    const bool spoil = rng.Coin();
    if (spoil) basis[rng.Index(k)] = "b";
    const bool at_max =
        PredictionBasisAccuracy("a", basis) == MaxPredictionBasisAccuracy(static_cast<int>(k));
    EXPECT_EQ(at_max, !spoil);
  }
}

TEST(PredictionBasisAccuracyTest, PrefixDominance) {
  Rng rng(63);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto k = static_cast<std::size_t>(rng.Int(2, 15));
    std::vector<std::string> basis;
    for (std::size_t i = 0; i < k; ++i) basis.push_back(rng.Coin() ? "a" : "b");
    const std::size_t i = static_cast<std::size_t>(rng.Int(1, static_cast<std::int64_t>(k) - 1));
    auto swapped = basis;
    std::swap(swapped[i], swapped[i - 1]);
    if (basis[i] == "a" && basis[i - 1] != "a") {
      EXPECT_GE(PredictionBasisAccuracy("a", swapped), PredictionBasisAccuracy("a", basis));
    }
  }
}

TEST(EvaluateTest, SingleIntraClassScoresMaximum) {
  Rng rng(64);
  const auto codes = percept_test::RandomCodes(rng, 30, 20);
  const Atlas atlas = BuildAtlas(codes);
  IntraLookup intra;
  for (const auto& c : codes) intra[c.sample_id] = "only";
  const EvalReport report = Evaluate(atlas, codes, intra, {.k = 5});
  ASSERT_EQ(report.per_query.size(), 30u);
  for (const auto& s : report.per_query) EXPECT_DOUBLE_EQ(s.p_acc, MaxPredictionBasisAccuracy(5));
  EXPECT_DOUBLE_EQ(report.std, 0.0);
  EXPECT_EQ(report.k, 5);
}

TEST(EvaluateTest, TruncatedBasis) {
  const Atlas atlas = BuildAtlas({CodeFromString("101", "a")});
  const IntraLookup intra = {{"a", "x"}, {"q", "x"}};
  const EvalReport report = Evaluate(atlas, {CodeFromString("111", "q")}, intra, {.k = 5});
  EXPECT_DOUBLE_EQ(report.per_query[0].p_acc, 0.5);
}

TEST(EvaluateTest, SelfIsExcluded) {
  const Atlas atlas = BuildAtlas({CodeFromString("111", "a"), CodeFromString("000", "b")});
  const IntraLookup intra = {{"a", "x"}, {"b", "y"}};
  const EvalReport report = Evaluate(atlas, {CodeFromString("111", "a")}, intra, {.k = 1});
  EXPECT_DOUBLE_EQ(report.per_query[0].p_acc, 0.0);
}

TEST(EvaluateTest, RandomTagsScoreAtChance) {
  Rng rng(65);
  for (int groups : {2, 3, 4}) {
    const auto codes = percept_test::RandomCodes(rng, 2000, 64);
    const auto queries = percept_test::RandomCodes(rng, 400, 64);
    IntraLookup intra;
    // Equal-sized groups in shuffled order.
    std::vector<int> tags;
    for (std::size_t i = 0; i < codes.size(); ++i) tags.push_back(static_cast<int>(i) % groups);
    std::shuffle(tags.begin(), tags.end(), rng.engine());
    for (std::size_t i = 0; i < codes.size(); ++i) intra[codes[i].sample_id] = std::to_string(tags[i]);
    std::vector<PerceptualCode> renamed;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      auto q = queries[i];
      q.sample_id = "q" + std::to_string(i);
      intra[q.sample_id] = std::to_string(i % static_cast<std::size_t>(groups));
      renamed.push_back(q);
    }
    const EvalReport report = Evaluate(BuildAtlas(codes), renamed, intra, {.k = 5});
    EXPECT_NEAR(report.mean, MaxPredictionBasisAccuracy(5) / groups, 0.05) << groups << " groups";
  }
}

TEST(EvaluateTest, MatchesSerialReference) {
  Rng rng(66);
  const auto codes = percept_test::RandomCodes(rng, 300, 50);
  IntraLookup intra;
  for (const auto& c : codes) intra[c.sample_id] = std::to_string(rng.Int(0, 2));
  const Atlas atlas = BuildAtlas(codes);
  for (bool weighted : {false, true}) {
    const QueryOptions options{.k = 4, .weighted = weighted, .transform = WeightTransform::kInverse};
    const EvalReport got = Evaluate(atlas, codes, intra, options);
    const EvalReport want = reference::Evaluate(atlas, codes, intra, options);
    ASSERT_EQ(got.per_query.size(), want.per_query.size());
    for (std::size_t i = 0; i < got.per_query.size(); ++i) {
      EXPECT_EQ(got.per_query[i].query_id, want.per_query[i].query_id);
      EXPECT_EQ(got.per_query[i].p_acc, want.per_query[i].p_acc);
    }
    EXPECT_EQ(got.mean, want.mean);
    EXPECT_EQ(got.std, want.std);
  }
}

TEST(EvaluateTest, SampleStandardDeviation) {
  const Atlas atlas = BuildAtlas({CodeFromString("11", "a"), CodeFromString("00", "b")});
  const IntraLookup intra = {{"a", "x"}, {"b", "y"}, {"q1", "x"}, {"q2", "y"}};
  // q1 is closest to a (match, 0.5); q2 is closest to a as well (miss, 0).
  const EvalReport report =
      Evaluate(atlas, {CodeFromString("11", "q1"), CodeFromString("10", "q2")}, intra, {.k = 1});
  EXPECT_DOUBLE_EQ(report.mean, 0.25);
  EXPECT_DOUBLE_EQ(report.std, std::sqrt(2 * 0.25 * 0.25 / 1.0));
}

TEST(EvaluateTest, MissingTagNamesSample) {
  const Atlas atlas = BuildAtlas({CodeFromString("11", "a"), CodeFromString("00", "b")});
  try {
    Evaluate(atlas, {CodeFromString("11", "q")}, {{"a", "x"}, {"q", "x"}}, {});
    FAIL() << "missing tag accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMetadata);
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
  }
}

TEST(EvaluateTest, IntraTagsFromTable) {
  MetadataTable table;
  table["a"] = {{"intra", "x"}};
  table["b"] = {{"group", "y"}};
  EXPECT_EQ(IntraTags(table), (IntraLookup{{"a", "x"}}));
  EXPECT_EQ(IntraTags(table, "group"), (IntraLookup{{"b", "y"}}));
}

TEST(ReportTest, TsvLayout) {
  percept_test::TempDir dir;
  EvalReport report;
  report.per_query = {{"q1", 0.5}, {"q2", 0.25}};
  report.mean = 0.375;
  report.std = 0.1767766953;
  report.k = 2;
  report.scenario = {{"k", "2"}};
  WriteReportTsv(report, {{"seed", 1}}, dir.file("r.tsv"));
  std::ifstream in(dir.file("r.tsv"));
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(),
            "# percept eval report\n"
            "# config\t{\"seed\":1}\n"
            "# k\t2\n"
            "query_id\tp_acc\n"
            "q1\t0.500000000\n"
            "q2\t0.250000000\n"
            "# mean\t0.375000000\n"
            "# std\t0.176776695\n");
}

}  // namespace
}  // namespace percept
