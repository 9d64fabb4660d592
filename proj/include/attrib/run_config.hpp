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

#ifndef ATTRIB_RUN_CONFIG_HPP_
#define ATTRIB_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "attrib/attribution.hpp"
#include "attrib/image.hpp"
#include "attrib/similarity.hpp"

namespace attrib {

enum class PromptMode { kNone, kText, kCaptionUrl, kRegistry, kManifest };

struct RunConfig {
  std::vector<ModelId> models;
  std::size_t gamma = kDefaultGamma;
  RankScheme scheme = RankScheme::kBest;
  SimilarityMethod extractor = SimilarityMethod::kSpectral;
  double combined_weight = 0.5;
  std::uint64_t seed = kDefaultSeed;

  PromptMode prompt_mode = PromptMode::kNone;
  std::string prompt;
  std::string caption_url;
  std::filesystem::path registry;
  bool lossy = false;

  std::string backend = "synthetic";  // or an http(s) gateway URL
  std::uint64_t family_seed = kDefaultSeed;
  std::size_t family_k = 4;
  std::string embed_url;
  std::optional<std::string> api_key;
  int timeout_ms = 30000;
  int retries = 2;
  std::filesystem::path cache_dir;
  std::size_t workers = 1;

  std::filesystem::path image;
  std::filesystem::path dataset;
  std::string out = "-";
  std::filesystem::path csv;
  std::vector<std::size_t> sweep_gamma;
  std::vector<AttackConfig> attacks;
  bool skip_errors = false;
  bool ablate_ranking = false;

  bool synthetic_backend() const { return backend == "synthetic"; }
};

// Registers the attribution / evaluation flags on `app`. After app.parse(),
// finalize() layers flags over the optional --config JSON file over the
// defaults and validates values. Errors are Error(kUsage).
class RunConfigParser {
 public:
  // dataset_mode: prompts default to the manifest and --dataset is required
  // instead of --image.
  RunConfigParser(CLI::App& app, bool dataset_mode);
  RunConfig finalize() const;

 private:
  struct Flags {
    std::string config;
    std::string models;
    std::size_t gamma = 0;
    std::string scheme, extractor;
    double combined_weight = 0;
    std::uint64_t seed = 0;
    std::string prompt, caption_url, registry;
    bool lossy = false;
    std::string backend;
    std::uint64_t family_seed = 0;
    std::size_t family_k = 0;
    std::string embed_url, api_key;
    int timeout_ms = 0, retries = 0;
    std::string cache_dir;
    std::size_t workers = 0;
    std::string image, dataset, out, csv, sweep_gamma, attacks;
    bool skip_errors = false, ablate_ranking = false;
  };

  CLI::App& app_;
  bool dataset_mode_;
  Flags flags_;
};

// Applies flat JSON keys (named like the flags, without dashes, e.g.
// "gamma", "caption-url") onto cfg. Unknown keys are usage errors.
void apply_config_json(RunConfig& cfg, const nlohmann::json& values);
// Value checks only; the presence of inputs is checked by require_run_inputs.
void validate_run_config(const RunConfig& cfg);
// Prompt source plus --image/--models (attribute) or --dataset (eval).
void require_run_inputs(const RunConfig& cfg, bool dataset_mode);

// Convenience wrapper for tests and scripts: parse argv-style tokens
// (without the program name).
RunConfig parse_config(const std::vector<std::string>& args, bool dataset_mode = false);

std::vector<ModelId> split_list(const std::string& csv);

}  // namespace attrib

#endif  // ATTRIB_RUN_CONFIG_HPP_
