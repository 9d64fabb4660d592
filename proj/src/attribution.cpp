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

#include "attrib/attribution.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <set>

#include "attrib/error.hpp"

namespace attrib {

namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<Image> GenerateModelPool(const Prompt& prompt, const ModelId& model,
                                     std::size_t gamma, std::uint64_t seed,
                                     const GenerationBackend& backend, const PoolCache* cache) {
  try {
    if (!backend.has_model(model)) {
      throw Error(ErrorCode::kGenerationFailed, "backend does not know '" + model + "'");
    }
    auto produce = [&](std::size_t n) { return backend.generate(model, prompt, n, seed); };
    auto images = cache ? cache->get_or_generate(prompt, model, gamma, seed, produce)
                        : produce(gamma);
    if (images.size() != gamma) {
      throw Error(ErrorCode::kCountMismatch, "got " + std::to_string(images.size()) +
                                                 " images, expected " + std::to_string(gamma));
    }
    return images;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kGenerationFailed) throw;
    throw Error(ErrorCode::kGenerationFailed, model + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kGenerationFailed, model + ": " + e.what());
  }
}

}  // namespace

RankScheme ParseRankScheme(const std::string& name) {
  if (name == "avg" || name == "AVG") return RankScheme::kAvg;
  if (name == "best" || name == "BEST") return RankScheme::kBest;
  if (name == "avg_best" || name == "AVG_BEST") return RankScheme::kAvgBest;
  throw Error(ErrorCode::kInvalidParam, "unknown ranking scheme '" + name + "'");
}

std::string ToString(RankScheme scheme) {
  switch (scheme) {
    case RankScheme::kAvg: return "avg";
    case RankScheme::kBest: return "best";
    case RankScheme::kAvgBest: return "avg_best";
  }
  return "?";
}

double rank_score(std::span<const double> scores, RankScheme scheme) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyScores, "cannot rank an empty score set");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double best = *hi;
  // Rounding in the sum can push the mean outside [min, max]; clamp it back.
  const double mean = std::clamp(std::accumulate(scores.begin(), scores.end(), 0.0) /
                                     static_cast<double>(scores.size()),
                                 *lo, best);
  switch (scheme) {
    case RankScheme::kAvg: return mean;
    case RankScheme::kBest: return best;
    case RankScheme::kAvgBest: return (mean + best) / 2.0;
  }
  return best;
}

double prompt_overlap(const Prompt& a, const Prompt& b) {
  const auto ta = tokenize_prompt(a.text);
  const auto tb = tokenize_prompt(b.text);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - common;
  return uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni);
}

Prompt KnownPrompt::invert(const Image&) const {
  if (text_.empty()) throw Error(ErrorCode::kPromptUnavailable, "no stored prompt");
  return Prompt{text_, PromptOrigin::kNatural};
}

Prompt invert_prompt(const Image& image, const PromptSource& source) {
  Prompt p = source.invert(image);
  if (p.text.empty()) throw Error(ErrorCode::kPromptUnavailable, "prompt source returned empty text");
  return p;
}

std::size_t CandidatePool::total() const {
  std::size_t n = 0;
  for (const auto& [_, images] : entries) n += images.size();
  return n;
}

CandidatePool generate_pool(const Prompt& prompt, std::span<const ModelId> models,
                            std::size_t gamma, std::uint64_t seed,
                            const GenerationBackend& backend, const PoolCache* cache) {
  if (gamma == 0) throw Error(ErrorCode::kInvalidParam, "gamma must be >= 1");
  if (models.empty()) throw Error(ErrorCode::kInvalidParam, "model set is empty");
  CandidatePool pool;
  pool.prompt = prompt;
  pool.gamma = gamma;
  pool.seed = seed;
  for (const auto& m : models) {
    pool.entries[m] = GenerateModelPool(prompt, m, gamma, seed, backend, cache);
  }
  return pool;
}

ModelId select_best(const std::map<ModelId, double>& final_scores) {
  if (final_scores.empty()) throw Error(ErrorCode::kEmptyScores, "no candidate models");
  // std::map iterates in lexicographic order, so strict > keeps the smallest
  // id among equal maxima.
  auto best = final_scores.begin();
  for (auto it = final_scores.begin(); it != final_scores.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

nlohmann::json ToJson(const AttributionResult& result) {
  nlohmann::json j;
  j["best"] = result.best;
  j["prompt"] = {{"text", result.prompt.text}, {"source", ToString(result.prompt.source)}};
  j["final_scores"] = result.final_scores;
  nlohmann::json sets = nlohmann::json::object();
  for (const auto& [m, set] : result.score_sets) sets[m] = set.scores;
  j["score_sets"] = sets;
  j["scheme"] = ToString(result.scheme);
  j["timing_ms"] = result.timing_ms;
  return j;
}

// ---------------------------------------------------------------- memo

std::shared_ptr<const PoolMemo::Reps> PoolMemo::get(const std::string& prompt,
                                                    const ModelId& model, std::uint64_t seed,
                                                    std::size_t gamma, const Loader& load) {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto& s = slots_[{prompt, model, seed}];
    if (!s) s = std::make_shared<Slot>();
    slot = s;
  }
  std::lock_guard<std::mutex> lock(slot->mu);
  if (!slot->reps || slot->reps->size() < gamma) {
    slot->reps = std::make_shared<const Reps>(load(std::max(gamma, min_generate_)));
    std::lock_guard<std::mutex> count_lock(mu_);
    ++loads_;
  }
  return slot->reps;
}

std::size_t PoolMemo::loads() const {
  std::lock_guard<std::mutex> lock(mu_);
  return loads_;
}

// ---------------------------------------------------------------- attributor

Attributor::Attributor(std::vector<ModelId> models, const GenerationBackend& backend,
                       Comparator comparator, AttributionConfig config,
                       const PoolCache* cache, std::shared_ptr<PoolMemo> memo)
    : models_(std::move(models)),
      backend_(backend),
      comparator_(std::move(comparator)),
      config_(config),
      cache_(cache),
      memo_(memo ? std::move(memo) : std::make_shared<PoolMemo>()) {
  if (models_.empty()) throw Error(ErrorCode::kInvalidParam, "model set is empty");
  if (config_.gamma == 0) throw Error(ErrorCode::kInvalidParam, "gamma must be >= 1");
  std::set<ModelId> unique;
  for (const auto& m : models_) {
    if (m.empty()) throw Error(ErrorCode::kInvalidParam, "empty model id");
    if (!unique.insert(m).second) throw Error(ErrorCode::kInvalidParam, "duplicate model id '" + m + "'");
  }
}

std::shared_ptr<const PoolMemo::Reps> Attributor::Pool(const Prompt& prompt,
                                                       const ModelId& model) const {
  return memo_->get(prompt.text, model, config_.seed, config_.gamma, [&](std::size_t n) {
    const auto images = GenerateModelPool(prompt, model, n, config_.seed, backend_, cache_);
    PoolMemo::Reps reps;
    reps.reserve(images.size());
    for (const auto& img : images) reps.push_back(comparator_.represent(img));
    return reps;
  });
}

AttributionResult Attributor::Run(const Image& image, const Prompt* known,
                                  const PromptSource* source) const {
  AttributionResult result;
  result.scheme = config_.scheme;
  const auto t_start = Clock::now();

  auto t = Clock::now();
  const Representation test = comparator_.represent(image);
  result.timing_ms["feature"] = MsSince(t);

  t = Clock::now();
  result.prompt = known ? *known : invert_prompt(image, *source);
  if (result.prompt.text.empty()) {
    throw Error(ErrorCode::kPromptUnavailable, "empty prompt");
  }
  result.timing_ms["prompt"] = MsSince(t);

  double pool_ms = 0;
  double score_ms = 0;
  for (const auto& model : models_) {
    t = Clock::now();
    const auto reps = Pool(result.prompt, model);
    pool_ms += MsSince(t);

    t = Clock::now();
    SimScoreSet set;
    set.model_id = model;
    set.scores.reserve(config_.gamma);
    for (std::size_t i = 0; i < config_.gamma; ++i) {
      set.scores.push_back(comparator_.compare(test, (*reps)[i]));
    }
    result.final_scores[model] = rank_score(set, config_.scheme);
    result.score_sets[model] = std::move(set);
    score_ms += MsSince(t);
  }
  result.timing_ms["pool"] = pool_ms;
  result.timing_ms["score"] = score_ms;
  result.best = select_best(result.final_scores);
  result.timing_ms["total"] = MsSince(t_start);
  return result;
}

AttributionResult Attributor::attribute(const Image& image, const PromptSource& prompts) const {
  return Run(image, nullptr, &prompts);
}

AttributionResult Attributor::attribute(const Image& image, const Prompt& prompt) const {
  return Run(image, &prompt, nullptr);
}

AttributionResult attribute(const Image& image, const std::vector<ModelId>& models,
                            const AttributionConfig& config, const GenerationBackend& backend,
                            const Comparator& comparator, const PromptSource& prompts) {
  return Attributor(models, backend, comparator, config).attribute(image, prompts);
}

}  // namespace attrib
