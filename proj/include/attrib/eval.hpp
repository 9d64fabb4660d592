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

#ifndef ATTRIB_EVAL_HPP_
#define ATTRIB_EVAL_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "attrib/attribution.hpp"
#include "attrib/dataset.hpp"
#include "attrib/image.hpp"
#include "attrib/synth.hpp"

namespace attrib {

struct ClassMetrics {
  double recall = 0;
  double precision = 0;
  double f1 = 0;
  bool recall_undefined = false;     // no truth items for the class
  bool precision_undefined = false;  // the class was never predicted
  std::size_t support = 0;
};

struct Metrics {
  std::size_t n = 0;
  double accuracy = 0;
  std::vector<ModelId> labels;
  std::map<ModelId, ClassMetrics> per_model;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][prediction]
};

// Accuracy, per-class recall / precision / F1 and the confusion matrix.
// Zero denominators yield 0 with the matching *_undefined flag set.
// Throws LengthMismatch or UnknownLabel.
Metrics compute_metrics(std::span<const ModelId> truth, std::span<const ModelId> pred,
                        std::span<const ModelId> models);

struct ItemOutcome {
  std::size_t index = 0;
  ModelId truth;
  ModelId pred;
  double best_score = 0;
};

struct ItemError {
  std::size_t index = 0;
  std::string path;
  std::string message;
};

struct EvalReport {
  Metrics metrics;
  std::vector<ItemOutcome> outcomes;
  std::vector<ItemError> errors;
  double mean_ms_per_sample = 0;
  std::map<std::string, double> mean_stage_ms;
  nlohmann::json config = nlohmann::json::object();
};

// timing is the only non-deterministic member.
nlohmann::json ToJson(const EvalReport& report, bool include_timing = true);
// setting,model,recall,precision,f1,support,accuracy
void AppendCsv(std::string& csv, const EvalReport& report, const std::string& setting);
inline constexpr const char* kCsvHeader = "setting,model,recall,precision,f1,support,accuracy\n";

// Decides the prompt used for an item. `original` is the stored image,
// `attacked` what the attributor sees.
class PromptProvider {
 public:
  virtual ~PromptProvider() = default;
  virtual Prompt prompt_for(const DatasetItem& item, const Image& original,
                            const Image& attacked) const = 0;
};

// Prompt stored in the manifest (natural-prompt condition).
class ManifestPrompts final : public PromptProvider {
 public:
  Prompt prompt_for(const DatasetItem& item, const Image&, const Image&) const override;
};

// Inverts the attacked image through a PromptSource (e.g. remote captioner).
class InvertAttacked final : public PromptProvider {
 public:
  explicit InvertAttacked(const PromptSource& source) : source_(source) {}
  Prompt prompt_for(const DatasetItem&, const Image&, const Image& attacked) const override;

 private:
  const PromptSource& source_;
};

// Registry lookups are by content hash, which an attack destroys, so the
// registry is queried with the stored image.
class RegistryPrompts final : public PromptProvider {
 public:
  explicit RegistryPrompts(const PromptRegistry& registry) : registry_(registry) {}
  Prompt prompt_for(const DatasetItem&, const Image& original, const Image&) const override;

 private:
  const PromptRegistry& registry_;
};

struct ExperimentOptions {
  std::size_t workers = 1;
  bool skip_errors = false;
  std::optional<AttackConfig> attack;
};

// Attributes every item (after the optional attack) and aggregates metrics.
// Without skip_errors the first failing item aborts the run.
EvalReport run_experiment(const LabeledDataset& dataset, const Attributor& attributor,
                          const PromptProvider& prompts, const ExperimentOptions& options);

// Inputs shared by the sweeps; each sweep builds its own attributors over a
// common PoolMemo so candidate pools are generated once.
struct ExperimentSetup {
  const GenerationBackend* backend = nullptr;
  const Comparator* comparator = nullptr;
  AttributionConfig attribution;
  const PoolCache* cache = nullptr;
};

std::vector<std::pair<std::size_t, EvalReport>> gamma_sweep(
    const LabeledDataset& dataset, const ExperimentSetup& setup, const PromptProvider& prompts,
    std::span<const std::size_t> gammas, const ExperimentOptions& options);

// Test images are attacked; candidates are generated clean.
std::vector<std::pair<AttackConfig, EvalReport>> robustness_sweep(
    const LabeledDataset& dataset, const ExperimentSetup& setup, const PromptProvider& prompts,
    std::span<const AttackConfig> attacks, const ExperimentOptions& options);

// Scores every item once and re-ranks the same score sets under each scheme.
// The "per_model_oracle" entry uses, for every true model, whichever scheme
// has the best recall on it, an upper bound that needs the labels.
std::map<std::string, EvalReport> ranking_ablation(const LabeledDataset& dataset,
                                                   const ExperimentSetup& setup,
                                                   const PromptProvider& prompts,
                                                   const ExperimentOptions& options);

// For each item, generate n_per_image new images from its labelled model
// with its prompt; images go to out_dir/<label>/ and a manifest is written to
// out_dir/manifest.jsonl. Returns the input items followed by the new ones.
LabeledDataset augment_pool(const LabeledDataset& dataset, std::size_t n_per_image,
                            const GenerationBackend& backend, const PromptProvider& prompts,
                            std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace attrib

#endif  // ATTRIB_EVAL_HPP_
