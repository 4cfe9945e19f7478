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
#include <limits>

#include "percept/container.hpp"
#include "percept/encoder.hpp"
#include "percept/reference.hpp"
#include "test_util.hpp"

namespace percept {
namespace {

using percept_test::MakeBank;
using percept_test::Rng;

std::vector<bool> Bits(const PerceptualCode& code) { return code.bits.ToBools(); }

ClassBank RandomBank(Rng& rng, std::size_t neurons, std::size_t components) {
  std::vector<std::vector<GmmComponent>> spec(neurons);
  for (auto& comps : spec) {
    for (std::size_t t = 0; t < components; ++t) {
      comps.push_back({1.0 / static_cast<double>(components), rng.Real(-5, 5),
                       rng.Real(0.01, 3.0), rng.Coin(0.7)});
    }
    std::sort(comps.begin(), comps.end(),
              [](const GmmComponent& a, const GmmComponent& b) { return a.mean < b.mean; });
  }
  return MakeBank(spec);
}

TEST(EncoderTest, ValueInsideRelevantInterval) {
  ClassBank bank = MakeBank({{{1.0, 2.0, 0.5, true}}});
  EXPECT_EQ(Bits(Encode(std::vector<double>{2.2}, bank, "s")), (std::vector<bool>{true}));
  bank.neuron_gmms[0].components[0].relevant = false;
  EXPECT_EQ(Bits(Encode(std::vector<double>{2.2}, bank, "s")), (std::vector<bool>{false}));
}

TEST(EncoderTest, AllIrrelevantGivesZeroCode) {
  const ClassBank bank = MakeBank({{{0.5, 0, 1, false}, {0.5, 1, 1, false}},
                                   {{0.5, 0, 1, false}, {0.5, 1, 1, false}},
                                   {{0.5, 0, 1, false}, {0.5, 1, 1, false}}});
  const PerceptualCode code = Encode(std::vector<double>{0.0, 0.5, 1.0}, bank, "s");
  EXPECT_EQ(code.size(), 6u);
  EXPECT_EQ(code.bits.popcount(), 0u);
}

TEST(EncoderTest, IntervalEndpointsAreInclusive) {
  const ClassBank bank = MakeBank({{{1.0, 2.0, 0.5, true}}});
  for (double v : {1.5, 2.5}) {
    EXPECT_TRUE(Encode(std::vector<double>{v}, bank, "s").bits.test(0)) << v;
  }
  for (double v : {std::nextafter(1.5, 0.0), std::nextafter(2.5, 3.0)}) {
    EXPECT_FALSE(Encode(std::vector<double>{v}, bank, "s").bits.test(0)) << v;
  }
}

TEST(EncoderTest, KSigmaMode) {
  const ClassBank bank = MakeBank({{{1.0, 0.0, 4.0, true}}});
  const IntervalMode mode = IntervalMode::KSigma(1.5);
  EXPECT_DOUBLE_EQ(mode.HalfWidth(4.0), 3.0);
  EXPECT_TRUE(Encode(std::vector<double>{3.0}, bank, "s", mode).bits.test(0));
  EXPECT_TRUE(Encode(std::vector<double>{-3.0}, bank, "s", mode).bits.test(0));
  EXPECT_FALSE(Encode(std::vector<double>{3.01}, bank, "s", mode).bits.test(0));
  // Variance mode on the same bank: half width 4.
  EXPECT_TRUE(Encode(std::vector<double>{3.5}, bank, "s").bits.test(0));
}

TEST(EncoderTest, NeuronMajorLayout) {
  // Neuron j, component t -> bit j*T + t.
  const ClassBank bank = MakeBank({{{0.5, 0, 0.25, true}, {0.5, 10, 0.25, true}},
                                   {{0.5, 0, 0.25, true}, {0.5, 10, 0.25, true}}});
  const auto code = Encode(std::vector<double>{10.0, 0.0}, bank, "s");
  EXPECT_EQ(Bits(code), (std::vector<bool>{false, true, true, false}));
  EXPECT_EQ(code.class_label, "c");
  EXPECT_EQ(code.sample_id, "s");
}

TEST(EncoderTest, MatchesLiteralRuleOnRandomBanks) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = static_cast<std::size_t>(rng.Int(1, 40));
    const auto t = static_cast<std::size_t>(rng.Int(1, 4));
    const ClassBank bank = RandomBank(rng, m, t);
    const IntervalMode mode =
        rng.Coin() ? IntervalMode::Variance() : IntervalMode::KSigma(rng.Real(0.5, 3));
    std::vector<double> v(m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto& c = bank.neuron_gmms[j].components[rng.Index(t)];
      // Mix of exact endpoints, interior points and far-away values.
      switch (rng.Int(0, 3)) {
        case 0: v[j] = c.mean - mode.HalfWidth(c.variance); break;
        case 1: v[j] = c.mean + mode.HalfWidth(c.variance); break;
        case 2: v[j] = c.mean + rng.Real(-1, 1) * mode.HalfWidth(c.variance); break;
        default: v[j] = rng.Real(-20, 20);
      }
    }
    EXPECT_EQ(Bits(Encode(v, bank, "s", mode)), reference::EncodeBits(v, bank, mode))
        << "trial " << trial;
  }
}

TEST(EncoderTest, MonotoneMasking) {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const ClassBank bank = RandomBank(rng, 20, 2);
    std::vector<double> v(20);
    for (auto& x : v) x = rng.Real(-6, 6);
    ClassBank masked = bank;
    for (auto& g : masked.neuron_gmms) {
      for (auto& c : g.components) {
        if (rng.Coin(0.3)) c.relevant = false;
      }
    }
    const auto before = Bits(Encode(v, bank, "s"));
    const auto after = Bits(Encode(v, masked, "s"));
    for (std::size_t i = 0; i < before.size(); ++i) {
      EXPECT_TRUE(!after[i] || before[i]) << "bit " << i << " turned on";
    }
  }
}

TEST(EncoderTest, GeneratedSamplesHitExpectedMask) {
  // Disjoint intervals [-1, 1] and [4, 6] per neuron; each value is placed
  // inside one of them or in the gap, so the expected bit is known.
  Rng rng(33);
  constexpr std::size_t kNeurons = 10;
  std::vector<std::vector<GmmComponent>> spec(kNeurons);
  for (auto& comps : spec) {
    comps = {{0.5, 0.0, 1.0, rng.Coin(0.7)}, {0.5, 5.0, 1.0, rng.Coin(0.7)}};
  }
  const ClassBank bank = MakeBank(spec);
  std::vector<float> values;
  std::vector<std::vector<bool>> expected;
  for (int s = 0; s < 100; ++s) {
    std::vector<bool> mask(2 * kNeurons, false);
    for (std::size_t j = 0; j < kNeurons; ++j) {
      const auto where = rng.Int(0, 2);
      double v = 2.5;
      if (where < 2) {
        v = spec[j][static_cast<std::size_t>(where)].mean + rng.Real(-1, 1);
        mask[j * 2 + static_cast<std::size_t>(where)] = spec[j][static_cast<std::size_t>(where)].relevant;
      }
      values.push_back(static_cast<float>(v));
    }
    expected.push_back(mask);
  }
  const ActivationDump dump = percept_test::MakeDump(100, kNeurons, values);
  const auto codes = EncodeDump(dump, bank);
  ASSERT_EQ(codes.size(), 100u);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    EXPECT_EQ(Bits(codes[i]), expected[i]) << "sample " << i;
    EXPECT_EQ(codes[i].sample_id, dump.sample_ids[i]);
  }
}

TEST(EncoderTest, DumpRowsMatchSingleEncoding) {
  Rng rng(34);
  const ClassBank bank = RandomBank(rng, 15, 2);
  const ActivationDump dump = percept_test::RandomDump(rng, 60, 15);
  const auto codes = EncodeDump(dump, bank);
  const Encoder encoder(bank);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    EXPECT_EQ(codes[i], encoder.Encode(dump.values.row(i), dump.sample_ids[i]));
  }
}

TEST(EncoderTest, EmptyDumpGivesNoCodes) {
  Rng rng(35);
  const ClassBank bank = RandomBank(rng, 3, 2);
  ActivationDump dump = percept_test::MakeDump(0, 3, {});
  EXPECT_TRUE(EncodeDump(dump, bank).empty());
}

TEST(EncoderTest, Errors) {
  const ClassBank bank = MakeBank({{{1.0, 0.0, 1.0, true}}, {{1.0, 0.0, 1.0, true}}});
  EXPECT_PERCEPT_ERROR(Encode(std::vector<double>{1.0}, bank, "s"), ErrorKind::kDimension);
  EXPECT_PERCEPT_ERROR(
      Encode(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}, bank, "s"),
      ErrorKind::kValidation);

  const ActivationDump dump = percept_test::MakeDump(2, 2, {0, 0, 0, 0}, "dog");
  try {
    EncodeDump(dump, bank);
    FAIL() << "label mismatch accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kComparison);
    EXPECT_NE(std::string(e.what()).find("'dog'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'c'"), std::string::npos);
  }
  const ActivationDump wide = percept_test::MakeDump(1, 3, {0, 0, 0});
  EXPECT_PERCEPT_ERROR(EncodeDump(wide, bank), ErrorKind::kDimension);
}

TEST(IntervalModeTest, ParseAndFormat) {
  EXPECT_EQ(IntervalMode::Parse("variance"), IntervalMode::Variance());
  EXPECT_EQ(IntervalMode::Parse("k_sigma(2)"), IntervalMode::KSigma(2.0));
  EXPECT_EQ(IntervalMode::Parse("k_sigma(1.5)").k, 1.5);
  for (const auto& m : {IntervalMode::Variance(), IntervalMode::KSigma(2.5)}) {
    EXPECT_EQ(IntervalMode::Parse(m.ToString()), m);
  }
  for (const char* bad : {"", "sigma", "k_sigma()", "k_sigma(-1)", "k_sigma(2", "k_sigma(x)"}) {
    EXPECT_PERCEPT_ERROR(IntervalMode::Parse(bad), ErrorKind::kParameter);
  }
}

TEST(CodeSetTest, FileRoundTripAndPadCorruption) {
  percept_test::TempDir dir;
  Rng rng(36);
  CodeSet set;
  set.class_label = "c";
  set.code_length = 13;
  set.components_per_neuron = 1;
  set.codes = percept_test::RandomCodes(rng, 9, 13);
  const std::string path = dir.file("x.pccode");
  SaveCodes(set, nlohmann::json::object(), path);
  const CodeSet back = LoadCodes(path);
  EXPECT_EQ(back.codes, set.codes);
  EXPECT_EQ(back.code_length, 13u);

  // Set a pad bit of the last code's final byte.
  auto bytes = container::ReadFile(path);
  bytes.back() |= 0x80;
  container::WriteFile(path, bytes);
  EXPECT_PERCEPT_ERROR(LoadCodes(path), ErrorKind::kCorruption);
}

}  // namespace
}  // namespace percept
