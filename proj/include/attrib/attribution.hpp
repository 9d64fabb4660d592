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

#ifndef ATTRIB_ATTRIBUTION_HPP_
#define ATTRIB_ATTRIBUTION_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "attrib/backend.hpp"
#include "attrib/gateway.hpp"
#include "attrib/image.hpp"
#include "attrib/prompt.hpp"
#include "attrib/similarity.hpp"

namespace attrib {

inline constexpr std::size_t kDefaultGamma = 100;
inline constexpr std::uint64_t kDefaultSeed = 2023;

enum class RankScheme { kAvg, kBest, kAvgBest };

RankScheme ParseRankScheme(const std::string& name);
std::string ToString(RankScheme scheme);

// AVG = mean, BEST = max, AVG_BEST = (mean + max) / 2. Throws EmptyScores.
double rank_score(std::span<const double> scores, RankScheme scheme);
inline double rank_score(const SimScoreSet& set, RankScheme scheme) {
  return rank_score(std::span<const double>(set.scores), scheme);
}

// Jaccard overlap of the lowercased token sets.
double prompt_overlap(const Prompt& a, const Prompt& b);

// The true prompt is known (natural-prompt condition).
class KnownPrompt final : public PromptSource {
 public:
  KnownPrompt() = default;
  explicit KnownPrompt(std::string text) : text_(std::move(text)) {}
  Prompt invert(const Image& image) const override;

 private:
  std::string text_;
};

// Throws PromptUnavailable when the source cannot produce a non-empty prompt.
Prompt invert_prompt(const Image& image, const PromptSource& source);

struct CandidatePool {
  Prompt prompt;
  std::size_t gamma = 0;
  std::uint64_t seed = 0;
  std::map<ModelId, std::vector<Image>> entries;

  std::size_t total() const;
};

// gamma images per model; pool i of model m uses derive_seed(seed, m, i).
// Any backend failure aborts the whole pool with GenerationFailed.
CandidatePool generate_pool(const Prompt& prompt, std::span<const ModelId> models,
                            std::size_t gamma, std::uint64_t seed,
                            const GenerationBackend& backend, const PoolCache* cache = nullptr);

struct AttributionConfig {
  std::size_t gamma = kDefaultGamma;
  RankScheme scheme = RankScheme::kBest;
  std::uint64_t seed = kDefaultSeed;
};

struct AttributionResult {
  ModelId best;
  Prompt prompt;
  std::map<ModelId, double> final_scores;
  std::map<ModelId, SimScoreSet> score_sets;
  RankScheme scheme = RankScheme::kBest;
  std::map<std::string, double> timing_ms;
};

nlohmann::json ToJson(const AttributionResult& result);

// argmax over final scores; ties go to the lexicographically smallest id.
ModelId select_best(const std::map<ModelId, double>& final_scores);

// Candidate representations keyed by (prompt, model, seed). Larger pools
// serve smaller requests by prefix. Shared between attributors that use the
// same backend and comparator, e.g. across a gamma sweep.
class PoolMemo {
 public:
  using Reps = std::vector<Representation>;
  using Loader = std::function<Reps(std::size_t gamma)>;

  // Pools are always generated with at least this many images.
  explicit PoolMemo(std::size_t min_generate = 0) : min_generate_(min_generate) {}

  std::shared_ptr<const Reps> get(const std::string& prompt, const ModelId& model,
                                  std::uint64_t seed, std::size_t gamma, const Loader& load);
  std::size_t loads() const;

 private:
  struct Slot {
    std::mutex mu;
    std::shared_ptr<const Reps> reps;
  };
  std::size_t min_generate_;
  mutable std::mutex mu_;
  std::map<std::tuple<std::string, ModelId, std::uint64_t>, std::shared_ptr<Slot>> slots_;
  std::size_t loads_ = 0;
};

// Runs the four attribution steps: represent the test image, invert its
// prompt, score every candidate pool, rank and pick the best model.
class Attributor {
 public:
  Attributor(std::vector<ModelId> models, const GenerationBackend& backend,
             Comparator comparator, AttributionConfig config,
             const PoolCache* cache = nullptr, std::shared_ptr<PoolMemo> memo = nullptr);

  AttributionResult attribute(const Image& image, const PromptSource& prompts) const;
  AttributionResult attribute(const Image& image, const Prompt& prompt) const;

  const std::vector<ModelId>& models() const noexcept { return models_; }
  const AttributionConfig& config() const noexcept { return config_; }

 private:
  AttributionResult Run(const Image& image, const Prompt* known,
                        const PromptSource* source) const;
  std::shared_ptr<const PoolMemo::Reps> Pool(const Prompt& prompt, const ModelId& model) const;

  std::vector<ModelId> models_;
  const GenerationBackend& backend_;
  Comparator comparator_;
  AttributionConfig config_;
  const PoolCache* cache_;
  std::shared_ptr<PoolMemo> memo_;
};

AttributionResult attribute(const Image& image, const std::vector<ModelId>& models,
                            const AttributionConfig& config, const GenerationBackend& backend,
                            const Comparator& comparator, const PromptSource& prompts);

}  // namespace attrib

#endif  // ATTRIB_ATTRIBUTION_HPP_
