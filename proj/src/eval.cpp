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

#include "attrib/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "attrib/error.hpp"
#include "attrib/hashing.hpp"

namespace attrib {

namespace fs = std::filesystem;

Metrics compute_metrics(std::span<const ModelId> truth, std::span<const ModelId> pred,
                        std::span<const ModelId> models) {
  if (truth.size() != pred.size()) {
    throw Error(ErrorCode::kLengthMismatch, "truth has " + std::to_string(truth.size()) +
                                                " labels, prediction " +
                                                std::to_string(pred.size()));
  }
  if (truth.empty()) throw Error(ErrorCode::kLengthMismatch, "no labels to score");
  std::map<ModelId, std::size_t> index;
  for (const auto& m : models) index.emplace(m, index.size());
  auto lookup = [&](const ModelId& m) {
    auto it = index.find(m);
    if (it == index.end()) throw Error(ErrorCode::kUnknownLabel, "label '" + m + "' not in model set");
    return it->second;
  };

  Metrics out;
  out.n = truth.size();
  out.labels.assign(models.begin(), models.end());
  const std::size_t k = models.size();
  out.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::size_t t = lookup(truth[i]);
    const std::size_t p = lookup(pred[i]);
    ++out.confusion[t][p];
    if (t == p) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(out.n);

  for (std::size_t m = 0; m < k; ++m) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += out.confusion[m][j];
      col += out.confusion[j][m];
    }
    const auto tp = static_cast<double>(out.confusion[m][m]);
    ClassMetrics cm;
    cm.support = row;
    cm.recall_undefined = row == 0;
    cm.precision_undefined = col == 0;
    cm.recall = row == 0 ? 0.0 : tp / static_cast<double>(row);
    cm.precision = col == 0 ? 0.0 : tp / static_cast<double>(col);
    cm.f1 = cm.recall + cm.precision == 0
                ? 0.0
                : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    out.per_model[models[m]] = cm;
  }
  return out;
}

nlohmann::json ToJson(const EvalReport& report, bool include_timing) {
  nlohmann::json j;
  j["config"] = report.config;
  j["n"] = report.metrics.n;
  j["accuracy"] = report.metrics.accuracy;
  j["labels"] = report.metrics.labels;
  j["confusion"] = report.metrics.confusion;
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [m, c] : report.metrics.per_model) {
    per[m] = {{"recall", c.recall},
              {"precision", c.precision},
              {"f1", c.f1},
              {"support", c.support},
              {"recall_undefined", c.recall_undefined},
              {"precision_undefined", c.precision_undefined}};
  }
  j["per_model"] = per;
  nlohmann::json outcomes = nlohmann::json::array();
  for (const auto& o : report.outcomes) {
    outcomes.push_back(
        {{"index", o.index}, {"truth", o.truth}, {"pred", o.pred}, {"score", o.best_score}});
  }
  j["predictions"] = outcomes;
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : report.errors) {
    errors.push_back({{"index", e.index}, {"path", e.path}, {"error", e.message}});
  }
  j["errors"] = errors;
  if (include_timing) {
    j["timing"] = {{"mean_ms_per_sample", report.mean_ms_per_sample},
                   {"stages", report.mean_stage_ms}};
  }
  return j;
}

void AppendCsv(std::string& csv, const EvalReport& report, const std::string& setting) {
  std::ostringstream os;
  os << std::setprecision(6);
  for (const auto& m : report.metrics.labels) {
    const auto& c = report.metrics.per_model.at(m);
    os << setting << ',' << m << ',' << c.recall << ',' << c.precision << ',' << c.f1 << ','
       << c.support << ',' << report.metrics.accuracy << '\n';
  }
  csv += os.str();
}

// ---------------------------------------------------------------- prompts

Prompt ManifestPrompts::prompt_for(const DatasetItem& item, const Image&, const Image&) const {
  if (!item.prompt || item.prompt->text.empty()) {
    throw Error(ErrorCode::kPromptUnavailable, "no prompt stored for '" + item.path.string() + "'");
  }
  return *item.prompt;
}

Prompt InvertAttacked::prompt_for(const DatasetItem&, const Image&, const Image& attacked) const {
  return invert_prompt(attacked, source_);
}

Prompt RegistryPrompts::prompt_for(const DatasetItem&, const Image& original, const Image&) const {
  return invert_prompt(original, RegistryPromptSource(registry_));
}

// ---------------------------------------------------------------- runs

namespace {

template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

struct ItemRun {
  std::optional<AttributionResult> result;
  std::string error;
  std::exception_ptr exception;
  double ms = 0;
};

std::vector<ItemRun> AttributeAll(const LabeledDataset& dataset, const Attributor& attributor,
                                  const PromptProvider& prompts, const ExperimentOptions& options) {
  dataset.Validate();
  if (options.attack) options.attack->Validate();
  std::vector<ItemRun> runs(dataset.items.size());
  ParallelFor(dataset.items.size(), options.workers, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto& item = dataset.items[i];
      const Image original = item.load();
      const Image attacked = options.attack ? apply_attack(original, *options.attack) : original;
      const Prompt prompt = prompts.prompt_for(item, original, attacked);
      runs[i].result = attributor.attribute(attacked, prompt);
    } catch (const std::exception& e) {
      runs[i].error = e.what();
      runs[i].exception = std::current_exception();
    }
    runs[i].ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                     .count();
  });
  if (!options.skip_errors) {
    // First failure in item order, with its original error code.
    for (const auto& run : runs) {
      if (run.exception) std::rethrow_exception(run.exception);
    }
  }
  return runs;
}

using Predictor = std::function<std::pair<ModelId, double>(std::size_t, const AttributionResult&)>;

EvalReport BuildReport(const LabeledDataset& dataset, const std::vector<ItemRun>& runs,
                       const Predictor& predict) {
  EvalReport report;
  std::vector<ModelId> truth, pred;
  double total_ms = 0;
  std::size_t timed = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].result) {
      report.errors.push_back({i, dataset.items[i].path.string(), runs[i].error});
      continue;
    }
    const auto [label, score] = predict(i, *runs[i].result);
    truth.push_back(dataset.items[i].label);
    pred.push_back(label);
    report.outcomes.push_back({i, dataset.items[i].label, label, score});
    total_ms += runs[i].ms;
    ++timed;
    for (const auto& [stage, ms] : runs[i].result->timing_ms) report.mean_stage_ms[stage] += ms;
  }
  if (truth.empty()) throw Error(ErrorCode::kEmptyInput, "every item failed");
  report.metrics = compute_metrics(truth, pred, dataset.models);
  report.mean_ms_per_sample = total_ms / static_cast<double>(timed);
  for (auto& [_, ms] : report.mean_stage_ms) ms /= static_cast<double>(timed);
  return report;
}

nlohmann::json ConfigEcho(const Attributor& attributor, const Comparator* comparator,
                          const ExperimentOptions& options) {
  nlohmann::json c;
  c["models"] = attributor.models();
  c["gamma"] = attributor.config().gamma;
  c["scheme"] = ToString(attributor.config().scheme);
  c["seed"] = attributor.config().seed;
  if (comparator) c["extractor"] = comparator->id();
  c["attack"] = options.attack ? options.attack->ToString() : "none";
  c["skip_errors"] = options.skip_errors;
  return c;
}

EvalReport RunWith(const LabeledDataset& dataset, const Attributor& attributor,
                   const PromptProvider& prompts, const ExperimentOptions& options,
                   const Comparator* comparator) {
  const auto runs = AttributeAll(dataset, attributor, prompts, options);
  EvalReport report = BuildReport(dataset, runs, [](std::size_t, const AttributionResult& r) {
    return std::make_pair(r.best, r.final_scores.at(r.best));
  });
  report.config = ConfigEcho(attributor, comparator, options);
  return report;
}

void CheckSetup(const ExperimentSetup& setup) {
  if (!setup.backend || !setup.comparator) {
    throw Error(ErrorCode::kInvalidParam, "experiment needs a backend and a comparator");
  }
}

}  // namespace

EvalReport run_experiment(const LabeledDataset& dataset, const Attributor& attributor,
                          const PromptProvider& prompts, const ExperimentOptions& options) {
  return RunWith(dataset, attributor, prompts, options, nullptr);
}

std::vector<std::pair<std::size_t, EvalReport>> gamma_sweep(
    const LabeledDataset& dataset, const ExperimentSetup& setup, const PromptProvider& prompts,
    std::span<const std::size_t> gammas, const ExperimentOptions& options) {
  CheckSetup(setup);
  if (gammas.empty()) throw Error(ErrorCode::kInvalidParam, "no gamma values");
  if (!std::is_sorted(gammas.begin(), gammas.end()) || gammas.front() == 0) {
    throw Error(ErrorCode::kInvalidParam, "gamma values must be ascending and >= 1");
  }
  auto memo = std::make_shared<PoolMemo>(gammas.back());
  std::vector<std::pair<std::size_t, EvalReport>> out;
  for (std::size_t gamma : gammas) {
    AttributionConfig cfg = setup.attribution;
    cfg.gamma = gamma;
    Attributor attributor(dataset.models, *setup.backend, *setup.comparator, cfg, setup.cache,
                          memo);
    out.emplace_back(gamma, RunWith(dataset, attributor, prompts, options, setup.comparator));
  }
  return out;
}

std::vector<std::pair<AttackConfig, EvalReport>> robustness_sweep(
    const LabeledDataset& dataset, const ExperimentSetup& setup, const PromptProvider& prompts,
    std::span<const AttackConfig> attacks, const ExperimentOptions& options) {
  CheckSetup(setup);
  for (const auto& a : attacks) a.Validate();
  Attributor attributor(dataset.models, *setup.backend, *setup.comparator, setup.attribution,
                        setup.cache, std::make_shared<PoolMemo>());
  std::vector<std::pair<AttackConfig, EvalReport>> out;
  for (const auto& attack : attacks) {
    ExperimentOptions opts = options;
    opts.attack = attack;
    out.emplace_back(attack, RunWith(dataset, attributor, prompts, opts, setup.comparator));
  }
  return out;
}

std::map<std::string, EvalReport> ranking_ablation(const LabeledDataset& dataset,
                                                   const ExperimentSetup& setup,
                                                   const PromptProvider& prompts,
                                                   const ExperimentOptions& options) {
  CheckSetup(setup);
  Attributor attributor(dataset.models, *setup.backend, *setup.comparator, setup.attribution,
                        setup.cache);
  const auto runs = AttributeAll(dataset, attributor, prompts, options);

  auto rerank = [](const AttributionResult& r, RankScheme scheme) {
    std::map<ModelId, double> finals;
    for (const auto& [m, set] : r.score_sets) finals[m] = rank_score(set, scheme);
    const ModelId best = select_best(finals);
    return std::make_pair(best, finals.at(best));
  };

  std::map<std::string, EvalReport> out;
  for (RankScheme scheme : {RankScheme::kAvg, RankScheme::kBest, RankScheme::kAvgBest}) {
    EvalReport report = BuildReport(dataset, runs, [&](std::size_t, const AttributionResult& r) {
      return rerank(r, scheme);
    });
    report.config = ConfigEcho(attributor, setup.comparator, options);
    report.config["scheme"] = ToString(scheme);
    out.emplace(ToString(scheme), std::move(report));
  }

  std::map<ModelId, RankScheme> chosen;
  for (const auto& m : dataset.models) {
    RankScheme best_scheme = RankScheme::kAvg;
    double best_recall = -1;
    for (RankScheme scheme : {RankScheme::kAvg, RankScheme::kBest, RankScheme::kAvgBest}) {
      const double recall = out.at(ToString(scheme)).metrics.per_model.at(m).recall;
      if (recall > best_recall) {
        best_recall = recall;
        best_scheme = scheme;
      }
    }
    chosen[m] = best_scheme;
  }
  EvalReport oracle = BuildReport(dataset, runs, [&](std::size_t i, const AttributionResult& r) {
    return rerank(r, chosen.at(dataset.items[i].label));
  });
  oracle.config = ConfigEcho(attributor, setup.comparator, options);
  nlohmann::json picks = nlohmann::json::object();
  for (const auto& [m, s] : chosen) picks[m] = ToString(s);
  oracle.config["scheme"] = picks;
  out.emplace("per_model_oracle", std::move(oracle));
  return out;
}

LabeledDataset augment_pool(const LabeledDataset& dataset, std::size_t n_per_image,
                            const GenerationBackend& backend, const PromptProvider& prompts,
                            std::uint64_t seed, const fs::path& out_dir) {
  if (n_per_image == 0) return dataset;
  dataset.Validate();
  LabeledDataset out = dataset;
  for (const auto& m : dataset.models) {
    if (!backend.has_model(m)) {
      throw Error(ErrorCode::kGenerationFailed, "backend cannot generate for '" + m + "'");
    }
  }
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const auto& item = dataset.items[i];
    const Image original = item.load();
    const Prompt prompt = prompts.prompt_for(item, original, original);
    const std::uint64_t item_seed = derive_seed(seed, "augment", i);
    const auto images = backend.generate(item.label, prompt, n_per_image, item_seed);
    if (images.size() != n_per_image) {
      throw Error(ErrorCode::kCountMismatch, "backend returned a short batch");
    }
    fs::create_directories(out_dir / item.label);
    for (std::size_t j = 0; j < images.size(); ++j) {
      std::ostringstream name;
      name << "aug_" << std::setw(5) << std::setfill('0') << i << '_' << std::setw(3) << j << ".png";
      DatasetItem aug;
      aug.path = out_dir / item.label / name.str();
      aug.label = item.label;
      aug.prompt = prompt;
      save_image(images[j], aug.path);
      out.items.push_back(std::move(aug));
    }
  }
  write_manifest(out, out_dir / "manifest.jsonl");
  return out;
}

}  // namespace attrib
