// Copyright 2026 The attrib Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the attrib binary as a subprocess. ATTRIB_BIN is set by CMake.

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "attrib/image.hpp"
#include "test_util.hpp"

namespace attrib {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

struct Outcome {
  int code = -1;
  std::string out, err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Attrib(const TempDir& dir, const std::string& args) {
  const std::string cmd = std::string(ATTRIB_BIN) + " " + args + " >" + (dir / "stdout").string() +
                          " 2>" + (dir / "stderr").string();
  const int status = std::system(cmd.c_str());
  Outcome r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = Slurp(dir / "stdout");
  r.err = Slurp(dir / "stderr");
  return r;
}

// Small synthetic dataset shared by the tests below.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    std::ofstream(*dir_ / "prompts.txt") << "a red barn in a field\nthe streets of a big city at night\n";
    const Outcome r = Attrib(*dir_, "synth gen --k 3 --family-seed 2023 --per-prompt 2 --prompts " +
                                    (*dir_ / "prompts.txt").string() + " --out " + (*dir_ / "data").string());
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { delete dir_; }
  static fs::path Data(const std::string& rel) { return *dir_ / "data" / rel; }

  static TempDir* dir_;
  TempDir scratch_;
};
TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, SynthLayout) {
  for (const char* f : {"manifest.jsonl", "registry.json", "family.json", "m1/p0000_000.png",
                        "m3/p0001_001.png"}) {
    EXPECT_TRUE(fs::exists(Data(f))) << f;
  }
  std::ifstream in(Data("manifest.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    EXPECT_TRUE(j.contains("path") && j.contains("label") && j.contains("prompt"));
    ++n;
  }
  EXPECT_EQ(n, 2 * 3 * 2);
  EXPECT_EQ(json::parse(Slurp(Data("registry.json")))["entries"].size(), 12u);
  EXPECT_EQ(json::parse(Slurp(Data("family.json")))["models"].size(), 3u);
}

TEST_F(CliTest, AttributeStdoutIsPureJson) {
  const Outcome r = Attrib(scratch_, "attribute --image " + Data("m2/p0001_000.png").string() +
                                     " --models m1,m2,m3 --gamma 4 --registry " +
                                     Data("registry.json").string() + " --out -");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["best"], "m2");
  EXPECT_EQ(j["prompt"]["text"], "the streets of a big city at night");
  EXPECT_EQ(j["score_sets"]["m3"].size(), 4u);
  for (const char* key : {"best", "prompt", "final_scores", "score_sets", "scheme", "timing_ms"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_NE(r.err.find("best model"), std::string::npos);
}

TEST_F(CliTest, AttributeWritesFile) {
  const fs::path out = scratch_ / "result.json";
  const Outcome r = Attrib(scratch_, "attribute --image " + Data("m1/p0000_000.png").string() +
                                     " --models m1,m2 --gamma 2 --prompt 'a red barn in a field' --out " +
                                     out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(json::parse(Slurp(out))["best"], "m1");
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Attrib(scratch_, "attribute --gamma 0 --image x.png --models m1 --prompt p").code, 2);
  EXPECT_EQ(Attrib(scratch_, "attribute --image x.png --models m1").code, 2);
  EXPECT_EQ(Attrib(scratch_, "eval --bogus").code, 2);
  EXPECT_EQ(Attrib(scratch_, "").code, 2);
  EXPECT_EQ(Attrib(scratch_, "--help").code, 0);
  const Outcome missing = Attrib(scratch_, "attribute --image " + (scratch_ / "nope.png").string() +
                                           " --models m1 --prompt p");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("IoError"), std::string::npos);
  EXPECT_EQ(Attrib(scratch_, "attribute --image " + Data("m1/p0000_000.png").string() +
                                 " --models m1,m9 --gamma 1 --prompt p")
                .code,
            1);
  EXPECT_EQ(Attrib(scratch_, "synth gen --k 9 --prompts x --out y").code, 2);
}

TEST_F(CliTest, EvalReportAndCsv) {
  const fs::path csv = scratch_ / "r.csv";
  const Outcome r = Attrib(scratch_, "eval --dataset " + Data("manifest.jsonl").string() +
                                     " --gamma 3 --workers 2 --out - --csv " + csv.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["n"], 12);
  EXPECT_EQ(j["labels"], json({"m1", "m2", "m3"}));
  const std::string table = Slurp(csv);
  EXPECT_EQ(table.rfind("setting,model,recall,precision,f1,support,accuracy\n", 0), 0u);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
}

TEST_F(CliTest, EvalSweepsWithConfigFile) {
  std::ofstream(scratch_ / "cfg.json") << R"({"gamma": 2, "registry": ")" << Data("registry.json").string()
                                       << R"(", "lossy": true})";
  const Outcome r = Attrib(scratch_, "eval --config " + (scratch_ / "cfg.json").string() + " --dataset " +
                                     Data("manifest.jsonl").string() +
                                     " --sweep-gamma 1,2 --attacks jpeg:95 --ablate-ranking --out -");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["gamma_sweep"].size(), 2u);
  EXPECT_EQ(j["robustness"][0]["attack"], "jpeg:95");
  EXPECT_TRUE(j["ranking_ablation"].contains("per_model_oracle"));
}

TEST_F(CliTest, SpectraOutputs) {
  const fs::path out = scratch_ / "spectra";
  const Outcome r = Attrib(scratch_, "spectra --dataset " + Data("manifest.jsonl").string() +
                                     " --max-per-model 3 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = Slurp(out / "raps_m1.csv");
  EXPECT_EQ(csv.rfind("radius,mean_power,count\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 129);
  const Image heat = load_image(out / "spectrum_m2.png");
  EXPECT_EQ(heat.width(), 256u);
}

TEST_F(CliTest, AttackDirectory) {
  const fs::path out = scratch_ / "attacked";
  const Outcome r = Attrib(scratch_, "attack --op resize --param 0.5 --in " + Data("").string() + " --out " +
                                     out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_image(out / "m3/p0001_001.png").width(), 128u);
  EXPECT_EQ(Attrib(scratch_, "attack --op sharpen --param 1 --in a --out b").code, 2);
  EXPECT_EQ(Attrib(scratch_, "attack --op jpeg --param 0 --in a --out b").code, 2);
}

TEST_F(CliTest, Augment) {
  const fs::path out = scratch_ / "aug";
  const Outcome r = Attrib(scratch_, "augment --dataset " + Data("manifest.jsonl").string() +
                                     " --n-per-image 2 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string manifest = Slurp(out / "manifest.jsonl");
  EXPECT_EQ(std::count(manifest.begin(), manifest.end(), '\n'), 12 + 24);
  EXPECT_TRUE(fs::exists(out / "m2" / "aug_00000_001.png") || fs::exists(out / "m1" / "aug_00000_001.png"));
}

}  // namespace
}  // namespace attrib
