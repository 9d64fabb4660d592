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

#include <algorithm>
#include <fstream>
#include <set>
#include <thread>

#include "attrib/error.hpp"

namespace attrib {

namespace {

[[noreturn]] void Usage(const std::string& msg) { throw Error(ErrorCode::kUsage, msg); }

std::vector<std::size_t> ParseGammaList(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& tok : split_list(text)) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      Usage("--sweep-gamma expects positive integers, got '" + tok + "'");
    }
  }
  if (!std::is_sorted(out.begin(), out.end())) Usage("--sweep-gamma values must be ascending");
  return out;
}

std::vector<AttackConfig> ParseAttackList(const std::string& text) {
  std::vector<AttackConfig> out;
  for (const auto& tok : split_list(text)) {
    try {
      out.push_back(AttackConfig::Parse(tok));
    } catch (const Error& e) {
      Usage(std::string("--attacks: ") + e.what());
    }
  }
  return out;
}

bool IsUrl(const std::string& s) {
  return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0;
}

template <typename T>
T Get(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    Usage("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<ModelId> split_list(const std::string& csv) {
  std::vector<ModelId> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void apply_config_json(RunConfig& cfg, const nlohmann::json& values) {
  if (!values.is_object()) Usage("config file must hold a JSON object");
  int prompt_modes = 0;
  for (const auto& [key, v] : values.items()) {
    try {
      if (key == "models") {
        cfg.models = v.is_array() ? Get<std::vector<std::string>>(v, key)
                                  : split_list(Get<std::string>(v, key));
      } else if (key == "gamma") {
        const auto g = Get<long long>(v, key);
        if (g < 1) Usage("gamma must be >= 1");
        cfg.gamma = static_cast<std::size_t>(g);
      } else if (key == "scheme") {
        cfg.scheme = ParseRankScheme(Get<std::string>(v, key));
      } else if (key == "extractor") {
        cfg.extractor = ParseSimilarityMethod(Get<std::string>(v, key));
      } else if (key == "combined-weight") {
        cfg.combined_weight = Get<double>(v, key);
      } else if (key == "seed") {
        cfg.seed = Get<std::uint64_t>(v, key);
      } else if (key == "prompt") {
        cfg.prompt = Get<std::string>(v, key);
        cfg.prompt_mode = PromptMode::kText;
        ++prompt_modes;
      } else if (key == "caption-url") {
        cfg.caption_url = Get<std::string>(v, key);
        cfg.prompt_mode = PromptMode::kCaptionUrl;
        ++prompt_modes;
      } else if (key == "registry") {
        cfg.registry = Get<std::string>(v, key);
        cfg.prompt_mode = PromptMode::kRegistry;
        ++prompt_modes;
      } else if (key == "lossy") {
        cfg.lossy = Get<bool>(v, key);
      } else if (key == "backend") {
        cfg.backend = Get<std::string>(v, key);
      } else if (key == "family-seed") {
        cfg.family_seed = Get<std::uint64_t>(v, key);
      } else if (key == "k") {
        cfg.family_k = Get<std::size_t>(v, key);
      } else if (key == "embed-url") {
        cfg.embed_url = Get<std::string>(v, key);
      } else if (key == "api-key") {
        cfg.api_key = Get<std::string>(v, key);
      } else if (key == "timeout-ms") {
        cfg.timeout_ms = Get<int>(v, key);
      } else if (key == "retries") {
        cfg.retries = Get<int>(v, key);
      } else if (key == "cache-dir") {
        cfg.cache_dir = Get<std::string>(v, key);
      } else if (key == "workers") {
        cfg.workers = Get<std::size_t>(v, key);
      } else if (key == "image") {
        cfg.image = Get<std::string>(v, key);
      } else if (key == "dataset") {
        cfg.dataset = Get<std::string>(v, key);
      } else if (key == "out") {
        cfg.out = Get<std::string>(v, key);
      } else if (key == "csv") {
        cfg.csv = Get<std::string>(v, key);
      } else if (key == "sweep-gamma") {
        cfg.sweep_gamma = ParseGammaList(Get<std::string>(v, key));
      } else if (key == "attacks") {
        cfg.attacks = ParseAttackList(Get<std::string>(v, key));
      } else if (key == "skip-errors") {
        cfg.skip_errors = Get<bool>(v, key);
      } else if (key == "ablate-ranking") {
        cfg.ablate_ranking = Get<bool>(v, key);
      } else {
        Usage("unknown config key '" + key + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUsage) throw;
      Usage("config key '" + key + "': " + e.what());
    }
  }
  if (prompt_modes > 1) Usage("config file sets more than one prompt source");
}

void validate_run_config(const RunConfig& cfg) {
  if (cfg.gamma < 1) Usage("--gamma must be >= 1");
  if (cfg.workers < 1) Usage("--workers must be >= 1");
  if (cfg.timeout_ms <= 0) Usage("--timeout-ms must be > 0");
  if (cfg.retries < 0) Usage("--retries must be >= 0");
  if (!(cfg.combined_weight >= 0 && cfg.combined_weight <= 1)) {
    Usage("--combined-weight must be in [0,1]");
  }
  if (!cfg.synthetic_backend() && !IsUrl(cfg.backend)) {
    Usage("--backend must be 'synthetic' or an http(s) URL");
  }
  if (cfg.extractor == SimilarityMethod::kEmbed && cfg.embed_url.empty()) {
    Usage("--extractor embed needs --embed-url");
  }
  if (cfg.prompt_mode == PromptMode::kText && cfg.prompt.empty()) Usage("--prompt is empty");
  if (cfg.prompt_mode == PromptMode::kCaptionUrl && !IsUrl(cfg.caption_url)) {
    Usage("--caption-url must be an http(s) URL");
  }
  std::set<ModelId> seen;
  for (const auto& m : cfg.models) {
    if (!seen.insert(m).second) Usage("duplicate model '" + m + "'");
  }
}

void require_run_inputs(const RunConfig& cfg, bool dataset_mode) {
  if (cfg.prompt_mode == PromptMode::kNone) {
    Usage("choose one prompt source: --prompt, --caption-url or --registry");
  }
  if (dataset_mode) {
    if (cfg.dataset.empty()) Usage("--dataset is required");
  } else {
    if (cfg.image.empty()) Usage("--image is required");
    if (cfg.models.empty()) Usage("--models is required");
  }
}

RunConfigParser::RunConfigParser(CLI::App& app, bool dataset_mode)
    : app_(app), dataset_mode_(dataset_mode) {
  auto& f = flags_;
  app.add_option("--config", f.config, "JSON file with flat keys named like the flags");
  app.add_option("--models", f.models, "comma-separated candidate model ids");
  app.add_option("--gamma", f.gamma, "candidate images per model (default 100)");
  app.add_option("--scheme", f.scheme, "ranking scheme: avg | best | avg_best");
  app.add_option("--extractor", f.extractor, "similarity: spectral | embed | ssim | combined");
  app.add_option("--combined-weight", f.combined_weight, "cosine share of the combined score");
  app.add_option("--seed", f.seed, "run seed (default 2023)");
  app.add_option("--prompt", f.prompt, "known prompt text");
  app.add_option("--caption-url", f.caption_url, "gateway URL used for captioning");
  app.add_option("--registry", f.registry, "prompt registry written by 'synth gen'");
  app.add_flag("--lossy", f.lossy, "registry returns lossy paraphrases");
  app.add_option("--backend", f.backend, "'synthetic' or a gateway URL");
  app.add_option("--family-seed", f.family_seed, "synthetic family seed (default 2023)");
  app.add_option("--k", f.family_k, "synthetic family size (default 4)");
  app.add_option("--embed-url", f.embed_url, "gateway URL used for --extractor embed");
  app.add_option("--api-key", f.api_key, "sent as X-Api-Key");
  app.add_option("--timeout-ms", f.timeout_ms, "gateway timeout");
  app.add_option("--retries", f.retries, "gateway retries");
  app.add_option("--cache-dir", f.cache_dir, "on-disk candidate pool cache");
  app.add_option("--workers", f.workers, "parallel items (default: logical cores)");
  app.add_option("--out", f.out, "output JSON path, '-' for stdout");
  if (dataset_mode) {
    app.add_option("--dataset", f.dataset, "manifest.jsonl");
    app.add_option("--csv", f.csv, "also write a CSV table");
    app.add_option("--sweep-gamma", f.sweep_gamma, "e.g. 10,20,50");
    app.add_option("--attacks", f.attacks, "e.g. blur:1.0,jpeg:95,resize:0.5");
    app.add_flag("--skip-errors", f.skip_errors, "drop failing items instead of aborting");
    app.add_flag("--ablate-ranking", f.ablate_ranking, "report every ranking scheme");
  } else {
    app.add_option("--image", f.image, "test image (PNG or JPEG)");
  }
}

RunConfig RunConfigParser::finalize() const {
  RunConfig cfg;
  cfg.workers = std::max(1u, std::thread::hardware_concurrency());
  if (dataset_mode_) cfg.prompt_mode = PromptMode::kManifest;
  const auto& f = flags_;
  auto given = [&](const char* name) { return app_.count(name) > 0; };

  if (given("--config")) {
    std::ifstream in(f.config);
    if (!in) Usage("cannot read config file '" + f.config + "'");
    nlohmann::json values;
    try {
      values = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      Usage("config file '" + f.config + "' is not JSON: " + e.what());
    }
    apply_config_json(cfg, values);
  }

  try {
    if (given("--models")) cfg.models = split_list(f.models);
    if (given("--gamma")) {
      if (f.gamma < 1) Usage("--gamma must be >= 1");
      cfg.gamma = f.gamma;
    }
    if (given("--scheme")) cfg.scheme = ParseRankScheme(f.scheme);
    if (given("--extractor")) cfg.extractor = ParseSimilarityMethod(f.extractor);
    if (given("--combined-weight")) cfg.combined_weight = f.combined_weight;
    if (given("--seed")) cfg.seed = f.seed;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUsage) throw;
    Usage(e.what());
  }

  const int prompt_flags = given("--prompt") + given("--caption-url") + given("--registry");
  if (prompt_flags > 1) Usage("--prompt, --caption-url and --registry are mutually exclusive");
  if (given("--prompt")) {
    cfg.prompt_mode = PromptMode::kText;
    cfg.prompt = f.prompt;
  } else if (given("--caption-url")) {
    cfg.prompt_mode = PromptMode::kCaptionUrl;
    cfg.caption_url = f.caption_url;
  } else if (given("--registry")) {
    cfg.prompt_mode = PromptMode::kRegistry;
    cfg.registry = f.registry;
  }
  if (given("--lossy")) cfg.lossy = f.lossy;
  if (given("--backend")) cfg.backend = f.backend;
  if (given("--family-seed")) cfg.family_seed = f.family_seed;
  if (given("--k")) cfg.family_k = f.family_k;
  if (given("--embed-url")) cfg.embed_url = f.embed_url;
  if (given("--api-key")) cfg.api_key = f.api_key;
  if (given("--timeout-ms")) cfg.timeout_ms = f.timeout_ms;
  if (given("--retries")) cfg.retries = f.retries;
  if (given("--cache-dir")) cfg.cache_dir = f.cache_dir;
  if (given("--workers")) cfg.workers = f.workers;
  if (given("--out")) cfg.out = f.out;
  if (dataset_mode_) {
    if (given("--dataset")) cfg.dataset = f.dataset;
    if (given("--csv")) cfg.csv = f.csv;
    if (given("--sweep-gamma")) cfg.sweep_gamma = ParseGammaList(f.sweep_gamma);
    if (given("--attacks")) cfg.attacks = ParseAttackList(f.attacks);
    if (given("--skip-errors")) cfg.skip_errors = f.skip_errors;
    if (given("--ablate-ranking")) cfg.ablate_ranking = f.ablate_ranking;
  } else if (given("--image")) {
    cfg.image = f.image;
  }
  validate_run_config(cfg);
  return cfg;
}

RunConfig parse_config(const std::vector<std::string>& args, bool dataset_mode) {
  CLI::App app("attrib");
  RunConfigParser parser(app, dataset_mode);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    Usage(e.what());
  }
  return parser.finalize();
}

}  // namespace attrib
