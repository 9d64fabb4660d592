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

#include "attrib/run_config.hpp"

#include <fstream>

#include <gtest/gtest.h>

#include "attrib/error.hpp"
#include "test_util.hpp"

namespace attrib {
namespace {

using testing::TempDir;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no attrib::Error thrown";
  return ErrorCode::kInvalidParam;
}

TEST(RunConfigTest, NoFlagsGivesDefaults) {
  const RunConfig cfg = parse_config({});
  EXPECT_EQ(cfg.gamma, 100u);
  EXPECT_EQ(cfg.seed, 2023u);
  EXPECT_EQ(cfg.scheme, RankScheme::kBest);
  EXPECT_EQ(cfg.extractor, SimilarityMethod::kSpectral);
  EXPECT_TRUE(cfg.synthetic_backend());
  EXPECT_EQ(cfg.out, "-");
  EXPECT_GE(cfg.workers, 1u);
  EXPECT_EQ(cfg.prompt_mode, PromptMode::kNone);
  EXPECT_EQ(parse_config({}, true).prompt_mode, PromptMode::kManifest);
}

TEST(RunConfigTest, GammaZeroIsUsageError) {
  EXPECT_EQ(CodeOf([] { parse_config({"--gamma", "0"}); }), ErrorCode::kUsage);
  EXPECT_EQ(CodeOf([] { parse_config({"--gamma", "-3"}); }), ErrorCode::kUsage);
}

TEST(RunConfigTest, FlagsOverrideFileOverrideDefaults) {
  TempDir dir;
  std::ofstream(dir / "cfg.json") << R"({"gamma": 20, "scheme": "avg", "models": "m1,m2"})";
  const std::string path = (dir / "cfg.json").string();
  const RunConfig from_file = parse_config({"--config", path});
  EXPECT_EQ(from_file.gamma, 20u);
  EXPECT_EQ(from_file.scheme, RankScheme::kAvg);
  EXPECT_EQ(from_file.models, (std::vector<ModelId>{"m1", "m2"}));
  const RunConfig flagged = parse_config({"--config", path, "--gamma", "50"});
  EXPECT_EQ(flagged.gamma, 50u);
  EXPECT_EQ(flagged.scheme, RankScheme::kAvg);
  // Order on the command line does not matter.
  EXPECT_EQ(parse_config({"--gamma", "50", "--config", path}).gamma, 50u);
}

TEST(RunConfigTest, BadConfigFiles) {
  TempDir dir;
  std::ofstream(dir / "unknown.json") << R"({"gama": 20})";
  std::ofstream(dir / "broken.json") << "{";
  std::ofstream(dir / "two.json") << R"({"prompt": "x", "registry": "r.json"})";
  std::ofstream(dir / "zero.json") << R"({"gamma": 0})";
  for (const char* name : {"unknown.json", "broken.json", "two.json", "zero.json", "missing.json"}) {
    const std::string path = (dir / name).string();
    EXPECT_EQ(CodeOf([&] { parse_config({"--config", path}); }), ErrorCode::kUsage) << name;
  }
}

TEST(RunConfigTest, ParsesEveryFlag) {
  const RunConfig cfg = parse_config({"--models", "m1,m2,m3", "--gamma", "7", "--scheme", "avg_best",
                                      "--extractor", "combined", "--combined-weight", "0.25",
                                      "--seed", "99", "--prompt", "a cat", "--backend",
                                      "http://localhost:9000", "--family-seed", "5", "--k", "3",
                                      "--timeout-ms", "500", "--retries", "4", "--api-key", "k",
                                      "--cache-dir", "/tmp/c", "--workers", "2", "--image",
                                      "x.png", "--out", "r.json"});
  EXPECT_EQ(cfg.models.size(), 3u);
  EXPECT_EQ(cfg.gamma, 7u);
  EXPECT_EQ(cfg.scheme, RankScheme::kAvgBest);
  EXPECT_EQ(cfg.extractor, SimilarityMethod::kCombined);
  EXPECT_DOUBLE_EQ(cfg.combined_weight, 0.25);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.prompt_mode, PromptMode::kText);
  EXPECT_EQ(cfg.prompt, "a cat");
  EXPECT_FALSE(cfg.synthetic_backend());
  EXPECT_EQ(cfg.family_seed, 5u);
  EXPECT_EQ(cfg.family_k, 3u);
  EXPECT_EQ(cfg.timeout_ms, 500);
  EXPECT_EQ(cfg.retries, 4);
  EXPECT_EQ(cfg.api_key.value_or(""), "k");
  EXPECT_EQ(cfg.cache_dir, "/tmp/c");
  EXPECT_EQ(cfg.workers, 2u);
  EXPECT_EQ(cfg.image, "x.png");
  EXPECT_EQ(cfg.out, "r.json");
  EXPECT_NO_THROW(require_run_inputs(cfg, false));
}

TEST(RunConfigTest, DatasetFlags) {
  const RunConfig cfg = parse_config({"--dataset", "d.jsonl", "--sweep-gamma", "5,20,50", "--attacks",
                                      "blur:1.0,jpeg:95,resize:0.5", "--skip-errors", "--csv",
                                      "r.csv", "--registry", "reg.json", "--lossy"},
                                     true);
  EXPECT_EQ(cfg.sweep_gamma, (std::vector<std::size_t>{5, 20, 50}));
  ASSERT_EQ(cfg.attacks.size(), 3u);
  EXPECT_EQ(cfg.attacks[1].kind, AttackKind::kJpegCompression);
  EXPECT_TRUE(cfg.skip_errors);
  EXPECT_TRUE(cfg.lossy);
  EXPECT_EQ(cfg.prompt_mode, PromptMode::kRegistry);
  EXPECT_EQ(cfg.csv, "r.csv");
  EXPECT_NO_THROW(require_run_inputs(cfg, true));
}

TEST(RunConfigTest, UsageErrors) {
  const std::vector<std::vector<std::string>> bad = {
      {"--scheme", "median"},
      {"--extractor", "clip"},
      {"--prompt", "x", "--registry", "r.json"},
      {"--prompt", "x", "--caption-url", "http://h"},
      {"--caption-url", "not-a-url"},
      {"--backend", "ftp://x"},
      {"--extractor", "embed"},
      {"--models", "m1,m1"},
      {"--workers", "0"},
      {"--timeout-ms", "0"},
      {"--combined-weight", "1.5"},
      {"--no-such-flag"},
      {"--gamma", "many"},
  };
  for (const auto& args : bad) {
    EXPECT_EQ(CodeOf([&] { parse_config(args); }), ErrorCode::kUsage) << args[0];
  }
  const std::vector<std::vector<std::string>> bad_dataset = {
      {"--sweep-gamma", "20,10"},
      {"--sweep-gamma", "0,10"},
      {"--attacks", "blur:0"},
      {"--attacks", "jpeg:101"},
  };
  for (const auto& args : bad_dataset) {
    EXPECT_EQ(CodeOf([&] { parse_config(args, true); }), ErrorCode::kUsage) << args[1];
  }
}

TEST(RunConfigTest, RequiredInputs) {
  EXPECT_EQ(CodeOf([] { require_run_inputs(parse_config({"--image", "a.png", "--models", "m1"}), false); }),
            ErrorCode::kUsage);
  EXPECT_EQ(CodeOf([] { require_run_inputs(parse_config({"--prompt", "p", "--models", "m1"}), false); }),
            ErrorCode::kUsage);
  EXPECT_EQ(CodeOf([] { require_run_inputs(parse_config({"--prompt", "p", "--image", "a.png"}), false); }),
            ErrorCode::kUsage);
  EXPECT_EQ(CodeOf([] { require_run_inputs(parse_config({}, true), true); }), ErrorCode::kUsage);
}

TEST(RunConfigTest, SplitList) {
  EXPECT_EQ(split_list("a, b,,c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(split_list("").empty());
}

}  // namespace
}  // namespace attrib
