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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "percept/atlas.hpp"
#include "percept/container.hpp"
#include "percept/parallel.hpp"
#include "test_util.hpp"

namespace percept::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "percept");
  std::ostringstream out;
  std::ostringstream err;
  const int code = Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr const char* kSpec =
    "seed = 5\n"
    "neurons = 40\n"
    "train_per_intra = 30\n"
    "test_per_intra = 10\n"
    "[class pos]\n"
    "intra stripes neurons=0-7 shift=10\n"
    "intra sphere neurons=8-15 shift=10\n"
    "[class neg]\n"
    "intra chess neurons=20-27 shift=10\n"
    "intra plain neurons=28-35 shift=10\n";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::ofstream(dir_.file("spec.txt")) << kSpec;
  }
  void TearDown() override { SetThreadCount(0); }

  std::string F(const std::string& name) const { return dir_.file(name); }

  // synth -> hist -> fit -> encode -> atlas build -> eval, inside `sub`.
  void RunPipeline(const std::string& sub) {
    const std::string d = F(sub);
    auto ok = [](const Outcome& o) {
      ASSERT_EQ(o.code, 0) << o.err;
      EXPECT_TRUE(o.err.empty()) << o.err;
    };
    ok(Invoke({"synth", "--spec", F("spec.txt"), "--out-dir", d}));
    ok(Invoke({"hist", d + "/pos.train.pcact", "--bins", "32", "--out", d + "/pos.pchist"}));
    ok(Invoke({"fit", d + "/pos.train.pcact", "--q", "0.8", "--out", d + "/pos.pcbank"}));
    ok(Invoke({"encode", d + "/pos.train.pcact", "--bank", d + "/pos.pcbank", "--out",
               d + "/pos.train.pccode"}));
    ok(Invoke({"encode", d + "/pos.test.pcact", "--bank", d + "/pos.pcbank", "--out",
               d + "/pos.test.pccode"}));
    ok(Invoke({"atlas", "build", d + "/pos.train.pccode", "--meta", d + "/meta.tsv", "--out",
               d + "/pos.pcatlas"}));
    ok(Invoke({"eval", d + "/pos.pcatlas", "--test", d + "/pos.test.pccode", "--meta",
               d + "/meta.tsv", "-k", "5", "--report", d + "/report.tsv"}));
  }

  percept_test::TempDir dir_;
};

TEST_F(CliTest, EndToEndPipeline) {
  RunPipeline("run");
  const std::string report = Slurp(F("run/report.tsv"));
  EXPECT_EQ(report.rfind("# percept eval report\n", 0), 0u);
  EXPECT_NE(report.find("\"command\":\"eval\""), std::string::npos);
  EXPECT_NE(report.find("\"q\":0.8"), std::string::npos) << "fit config not inherited";
  EXPECT_NE(report.find("# mean\t"), std::string::npos);

  for (const char* f : {"pos.train.pcact", "pos.pchist", "pos.pcbank", "pos.test.pccode",
                        "pos.pcatlas"}) {
    const Outcome v = Invoke({"validate", F(std::string("run/") + f)});
    EXPECT_EQ(v.code, 0) << f << ": " << v.err;
    EXPECT_EQ(v.out.rfind("ok ", 0), 0u) << v.out;
  }

  const Outcome q = Invoke({"query", F("run/pos.pcatlas"), "--code",
                            F("run/pos.test.pccode") + ":pos-test-00003", "-k", "3"});
  ASSERT_EQ(q.code, 0) << q.err;
  EXPECT_NE(q.out.find("rank\tsample_id\tdistance\tmetadata\n1\tpos-train-"), std::string::npos)
      << q.out;

  const Outcome p = Invoke({"project", F("run/pos.pcatlas"), "--out", F("run/points.tsv"), "--svg",
                            F("run/points.svg")});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_NE(Slurp(F("run/points.svg")).find("<svg"), std::string::npos);
}

TEST_F(CliTest, InfoPrintsEmbeddedConfig) {
  RunPipeline("run");
  const Outcome bank = Invoke({"info", F("run/pos.pcbank")});
  ASSERT_EQ(bank.code, 0) << bank.err;
  EXPECT_NE(bank.out.find("\"command\": \"fit\""), std::string::npos) << bank.out;
  EXPECT_NE(bank.out.find("\"bins\": 64"), std::string::npos);
  EXPECT_NE(bank.out.find("\"seed\": 5"), std::string::npos);

  const Outcome atlas = Invoke({"info", F("run/pos.pcatlas")});
  EXPECT_NE(atlas.out.find("\"command\": \"atlas build\""), std::string::npos) << atlas.out;
  EXPECT_NE(atlas.out.find("\"q\": 0.8"), std::string::npos);

  const Outcome report = Invoke({"info", F("run/report.tsv")});
  EXPECT_EQ(report.out.rfind("# percept eval report\n# config\t{", 0), 0u) << report.out;
  EXPECT_EQ(report.out.find("query_id"), std::string::npos);
}

TEST_F(CliTest, DeterministicAcrossRuns) {
  RunPipeline("one");
  RunPipeline("two");
  EXPECT_EQ(Slurp(F("one/report.tsv")), Slurp(F("two/report.tsv")));
  EXPECT_EQ(Slurp(F("one/pos.pcatlas")), Slurp(F("two/pos.pcatlas")));
  EXPECT_EQ(Slurp(F("one/pos.pcbank")), Slurp(F("two/pos.pcbank")));
}

TEST_F(CliTest, ThreadCountDoesNotChangeOutputs) {
  RunPipeline("default");
  SetThreadCount(0);
  const std::string d = F("default");
  ASSERT_EQ(Invoke({"--threads", "3", "eval", d + "/pos.pcatlas", "--test", d + "/pos.test.pccode",
                    "--meta", d + "/meta.tsv", "--report", d + "/report3.tsv"})
                .code,
            0);
  EXPECT_EQ(ThreadCount(), 3);
  EXPECT_EQ(Slurp(d + "/report.tsv"), Slurp(d + "/report3.tsv"));

  ::setenv("PERCEPT_THREADS", "2", 1);
  ASSERT_EQ(Invoke({"validate", d + "/pos.pcatlas"}).code, 0);
  ::unsetenv("PERCEPT_THREADS");
  EXPECT_EQ(ThreadCount(), 2);
}

TEST_F(CliTest, MismatchedClassNamesBothLabels) {
  RunPipeline("run");
  const std::string d = F("run");
  // Codes of class 'neg' queried against the 'pos' atlas.
  ASSERT_EQ(Invoke({"fit", d + "/neg.train.pcact", "--out", d + "/neg.pcbank"}).code, 0);
  ASSERT_EQ(Invoke({"encode", d + "/neg.test.pcact", "--bank", d + "/neg.pcbank", "--out",
                    d + "/neg.test.pccode"})
                .code,
            0);
  const Outcome q =
      Invoke({"query", d + "/pos.pcatlas", "--code", d + "/neg.test.pccode:neg-test-00000"});
  EXPECT_EQ(q.code, kExitDomainError);
  EXPECT_EQ(q.err.rfind("percept: error: comparison: ", 0), 0u) << q.err;
  EXPECT_NE(q.err.find("'pos'"), std::string::npos) << q.err;
  EXPECT_NE(q.err.find("'neg'"), std::string::npos) << q.err;
  EXPECT_EQ(q.err.find('\n'), q.err.size() - 1) << "error must be a single line";

  // Encoding with the wrong bank is refused the same way.
  const Outcome e = Invoke({"encode", d + "/neg.test.pcact", "--bank", d + "/pos.pcbank", "--out",
                            d + "/x.pccode"});
  EXPECT_EQ(e.code, kExitDomainError);
  EXPECT_NE(e.err.find("'pos'"), std::string::npos) << e.err;
  EXPECT_NE(e.err.find("'neg'"), std::string::npos) << e.err;

  // Unless the predicted class says otherwise.
  const Outcome predicted = Invoke({"encode", d + "/neg.test.pcact", "--bank", d + "/pos.pcbank",
                                    "--predicted", "pos", "--out", d + "/x.pccode"});
  EXPECT_EQ(predicted.code, kExitOk) << predicted.err;
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"fit", "x.pcact", "--out", "y", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"fit", "x.pcact"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"hist", "x", "--bins", "many", "--out", "y"}).code, kExitUsage);
  const Outcome help = Invoke({"fit", "--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("--components"), std::string::npos);
}

TEST_F(CliTest, DomainErrorsExitOne) {
  std::ofstream(F("junk.bin")) << "not an artifact at all";
  const Outcome junk = Invoke({"validate", F("junk.bin")});
  EXPECT_EQ(junk.code, kExitDomainError);
  EXPECT_EQ(junk.err.rfind("percept: error: format: ", 0), 0u) << junk.err;

  const Outcome missing = Invoke({"validate", F("nope.pcact")});
  EXPECT_EQ(missing.code, kExitDomainError);
  EXPECT_EQ(missing.err.rfind("percept: error: io: ", 0), 0u) << missing.err;

  RunPipeline("run");
  const std::string d = F("run");
  const Outcome k0 = Invoke({"eval", d + "/pos.pcatlas", "--test", d + "/pos.test.pccode", "--meta",
                             d + "/meta.tsv", "-k", "0", "--report", d + "/r.tsv"});
  EXPECT_EQ(k0.code, kExitDomainError);
  EXPECT_EQ(k0.err.rfind("percept: error: parameter: ", 0), 0u) << k0.err;

  const Outcome no_sample =
      Invoke({"query", d + "/pos.pcatlas", "--code", d + "/pos.test.pccode:ghost"});
  EXPECT_EQ(no_sample.code, kExitDomainError);
  EXPECT_NE(no_sample.err.find("ghost"), std::string::npos);

  const Outcome bad_spec = Invoke({"query", d + "/pos.pcatlas", "--code", "nocolon"});
  EXPECT_EQ(bad_spec.code, kExitDomainError);

  const Outcome mode = Invoke({"encode", d + "/pos.test.pcact", "--bank", d + "/pos.pcbank",
                               "--interval-mode", "sideways", "--out", d + "/m.pccode"});
  EXPECT_EQ(mode.code, kExitDomainError);
}

TEST_F(CliTest, AtlasFootprintReported) {
  RunPipeline("run");
  const std::string d = F("run");
  const Outcome o = Invoke({"atlas", "build", d + "/pos.train.pccode", "--out", d + "/a.pcatlas"});
  ASSERT_EQ(o.code, 0) << o.err;
  // M = 40, T = 2: 10 code bytes against 160 raw bytes per sample.
  EXPECT_NE(o.out.find("code=10 "), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("raw_activations=160"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("compression=16.00x"), std::string::npos) << o.out;
}

TEST_F(CliTest, WeightedQueryAndKSigmaEncode) {
  RunPipeline("run");
  const std::string d = F("run");
  ASSERT_EQ(Invoke({"encode", d + "/pos.test.pcact", "--bank", d + "/pos.pcbank",
                    "--interval-mode", "k_sigma(2)", "--out", d + "/ks.pccode"})
                .code,
            0);
  EXPECT_NE(Invoke({"info", d + "/ks.pccode"}).out.find("k_sigma(2"), std::string::npos);
  const Outcome q = Invoke({"query", d + "/pos.pcatlas", "--code",
                            d + "/pos.train.pccode:pos-train-00000", "--weighted",
                            "--weight-transform", "inverse", "--exclude-self", "-k", "2"});
  ASSERT_EQ(q.code, 0) << q.err;
  EXPECT_EQ(q.out.find("pos-train-00000\t"), std::string::npos) << q.out;
  EXPECT_NE(q.out.find("\"weight_transform\":\"inverse\""), std::string::npos);
}

}  // namespace
}  // namespace percept::cli
