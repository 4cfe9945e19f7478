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

#include <fstream>
#include <numeric>
#include <sstream>

#include "percept/atlas.hpp"
#include "percept/container.hpp"
#include "percept/reference.hpp"
#include "test_util.hpp"

namespace percept {
namespace {

using percept_test::CodeFromString;
using percept_test::Rng;

std::string Serialize(const Atlas& atlas) {
  std::ostringstream out(std::ios::binary);
  WriteAtlas(atlas, nlohmann::json::object(), out);
  return out.str();
}

Atlas Deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return ReadAtlas(in);
}

std::vector<BitCode> BitsOf(const std::vector<PerceptualCode>& codes) {
  std::vector<BitCode> out;
  for (const auto& c : codes) out.push_back(c.bits);
  return out;
}

TEST(AtlasTest, WeightsAreColumnSums) {
  const Atlas atlas = BuildAtlas({CodeFromString("1010", "a"), CodeFromString("1001", "b")});
  EXPECT_EQ(atlas.weights, (std::vector<std::uint64_t>{2, 0, 1, 1}));
  EXPECT_EQ(atlas.code_length, 4u);
  EXPECT_EQ(atlas.class_label, "c");
  EXPECT_EQ(atlas.entries[0].sample_id, "a");
  EXPECT_EQ(atlas.entries[1].sample_id, "b");
}

TEST(AtlasTest, SingleZeroCode) {
  const Atlas atlas = BuildAtlas({CodeFromString("00000", "a")});
  EXPECT_EQ(atlas.weights, std::vector<std::uint64_t>(5, 0));
}

TEST(AtlasTest, WeightsMatchNaiveRecount) {
  Rng rng(41);
  for (std::size_t n : {1u, 63u, 64u, 65u, 200u}) {
    const auto codes = percept_test::RandomCodes(rng, 500, n, rng.Real(0.05, 0.95));
    const Atlas atlas = BuildAtlas(codes);
    EXPECT_EQ(atlas.weights, reference::ColumnCounts(BitsOf(codes))) << "length " << n;
    std::size_t pop = 0;
    for (const auto& c : codes) pop += c.bits.popcount();
    EXPECT_EQ(std::accumulate(atlas.weights.begin(), atlas.weights.end(), std::uint64_t{0}), pop);
  }
}

TEST(AtlasTest, IncrementalConsistency) {
  Rng rng(42);
  auto codes = percept_test::RandomCodes(rng, 50, 77);
  const Atlas before = BuildAtlas(codes);
  const PerceptualCode extra = percept_test::MakeCode(rng.Bools(77), "extra");
  codes.push_back(extra);
  const Atlas after = BuildAtlas(codes);
  for (std::size_t i = 0; i < 77; ++i) {
    EXPECT_EQ(after.weights[i], before.weights[i] + (extra.bits.test(i) ? 1 : 0));
  }
}

TEST(AtlasTest, MetadataAttached) {
  MetadataTable meta;
  meta["a"] = {{"intra", "x"}, {"split", "train"}};
  const Atlas atlas = BuildAtlas({CodeFromString("1", "a"), CodeFromString("0", "b")}, meta);
  EXPECT_EQ(atlas.entries[0].metadata.at("intra"), "x");
  EXPECT_TRUE(atlas.entries[1].metadata.empty());
}

TEST(AtlasTest, BuildErrors) {
  EXPECT_PERCEPT_ERROR(BuildAtlas({}), ErrorKind::kInsufficientData);
  EXPECT_PERCEPT_ERROR(
      BuildAtlas({CodeFromString("10", "a", "x"), CodeFromString("10", "b", "y")}),
      ErrorKind::kConsistency);
  EXPECT_PERCEPT_ERROR(BuildAtlas({CodeFromString("10", "a"), CodeFromString("101", "b")}),
                       ErrorKind::kConsistency);
  EXPECT_PERCEPT_ERROR(BuildAtlas({CodeFromString("10", "a"), CodeFromString("01", "a")}),
                       ErrorKind::kDuplicate);
}

TEST(AtlasTest, RoundTrip) {
  Rng rng(43);
  for (std::size_t n : {1u, 9u, 64u, 130u}) {
    auto codes = percept_test::RandomCodes(rng, 20, n);
    MetadataTable meta;
    meta[codes[3].sample_id] = {{"intra", "t"}};
    const Atlas atlas = BuildAtlas(codes, meta);
    EXPECT_EQ(Deserialize(Serialize(atlas)), atlas) << "length " << n;
  }
}

TEST(AtlasTest, EveryFlippedPayloadBitIsDetected) {
  Rng rng(44);
  const Atlas atlas = BuildAtlas(percept_test::RandomCodes(rng, 6, 13));
  const std::string bytes = Serialize(atlas);
  std::istringstream header_in(bytes, std::ios::binary);
  const auto offset = static_cast<std::size_t>(container::ReadHeader(header_in).payload_offset);
  for (std::size_t byte = offset; byte < bytes.size(); ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      std::string corrupt = bytes;
      corrupt[byte] = static_cast<char>(corrupt[byte] ^ (1 << bit));
      EXPECT_PERCEPT_ERROR(Deserialize(corrupt), ErrorKind::kCorruption);
    }
  }
}

TEST(AtlasTest, EmptyAtlasFileRejected) {
  std::ostringstream out(std::ios::binary);
  const nlohmann::json meta = {{"class_label", "c"},
                               {"code_length", 4},
                               {"count", 0},
                               {"entries", nlohmann::json::array()}};
  const std::vector<std::uint8_t> payload(4 * 8, 0);
  container::WriteFrame(out, container::kAtlasMagic, Atlas::kFormatVersion, meta, payload);
  EXPECT_PERCEPT_ERROR(Deserialize(out.str()), ErrorKind::kInsufficientData);
  EXPECT_PERCEPT_ERROR(Serialize(Atlas{}), ErrorKind::kInsufficientData);
}

TEST(AtlasTest, VersionMismatchRejected) {
  std::string bytes = Serialize(BuildAtlas({CodeFromString("1", "a")}));
  bytes[8] = 9;
  EXPECT_PERCEPT_ERROR(Deserialize(bytes), ErrorKind::kFormat);
}

TEST(AtlasTest, FootprintAtSixteenfoldCompression) {
  Rng rng(45);
  // M = 200 neurons, T = 2 components.
  const Atlas atlas = BuildAtlas(percept_test::RandomCodes(rng, 100, 400));
  const AtlasFootprint fp = MeasureFootprint(atlas, 200, 0);
  EXPECT_EQ(fp.code_bytes_per_sample, 50u);
  EXPECT_EQ(fp.raw_bytes_per_sample, 800u);
}

TEST(MetadataTsvTest, RoundTripAndErrors) {
  percept_test::TempDir dir;
  const std::vector<std::pair<std::string, SampleMetadata>> rows = {
      {"a", {{"intra", "x"}, {"class", "c"}}}, {"b", {}}};
  WriteMetadataTsv(dir.file("m.tsv"), rows);
  const MetadataTable table = ReadMetadataTsv(dir.file("m.tsv"));
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(table.at("a"), rows[0].second);
  EXPECT_TRUE(table.at("b").empty());

  {
    std::ofstream out(dir.file("bad.tsv"));
    out << "# comment\n" << "a\tnovalue\n";
  }
  EXPECT_PERCEPT_ERROR(ReadMetadataTsv(dir.file("bad.tsv")), ErrorKind::kMetadata);
  {
    std::ofstream out(dir.file("dup.tsv"));
    out << "a\tk=1\na\tk=2\n";
  }
  EXPECT_PERCEPT_ERROR(ReadMetadataTsv(dir.file("dup.tsv")), ErrorKind::kDuplicate);
}

}  // namespace
}  // namespace percept
