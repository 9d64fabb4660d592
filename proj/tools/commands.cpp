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

#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "attrib/attribution.hpp"
#include "attrib/dataset.hpp"
#include "attrib/error.hpp"
#include "attrib/eval.hpp"
#include "attrib/gateway.hpp"
#include "attrib/spectral.hpp"
#include "attrib/synth.hpp"

namespace attrib::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void Log(const std::string& msg) { std::cerr << "[attrib] " << msg << '\n'; }

[[noreturn]] void Usage(const std::string& msg) { throw Error(ErrorCode::kUsage, msg); }

void WriteText(const std::string& out, const std::string& text) {
  if (out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot write '" + out + "'");
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "write failed for '" + out + "'");
}

void WriteJson(const std::string& out, const json& j) { WriteText(out, j.dump(2) + "\n"); }

GatewayConfig Gateway(const RunConfig& cfg, const std::string& url) {
  GatewayConfig g;
  g.base_url = url;
  g.timeout_ms = cfg.timeout_ms;
  g.retries = cfg.retries;
  g.api_key = cfg.api_key;
  return g;
}

// Everything a run needs, built from a RunConfig. Members are heap-allocated
// so references handed out stay valid.
struct Runtime {
  std::unique_ptr<GenerationBackend> backend;
  std::shared_ptr<const FeatureExtractor> extractor;
  std::unique_ptr<Comparator> comparator;
  std::unique_ptr<PoolCache> cache;
  std::unique_ptr<PromptRegistry> registry;
  std::unique_ptr<PromptSource> source;

  explicit Runtime(const RunConfig& cfg) {
    if (cfg.synthetic_backend()) {
      backend = std::make_unique<SyntheticBackend>(make_family(kFamilyPaletteSize, cfg.family_seed));
    } else {
      backend = std::make_unique<RemoteBackend>(GatewayClient(Gateway(cfg, cfg.backend)));
    }
    if (!cfg.embed_url.empty()) {
      extractor = std::make_shared<RemoteEmbedExtractor>(GatewayClient(Gateway(cfg, cfg.embed_url)));
    } else if (cfg.extractor != SimilarityMethod::kSsim) {
      extractor = std::make_shared<SpectralExtractor>();
    }
    comparator = std::make_unique<Comparator>(cfg.extractor, extractor, cfg.combined_weight);
    if (!cfg.cache_dir.empty()) cache = std::make_unique<PoolCache>(cfg.cache_dir);
    switch (cfg.prompt_mode) {
      case PromptMode::kText:
        source = std::make_unique<KnownPrompt>(cfg.prompt);
        break;
      case PromptMode::kCaptionUrl:
        source = std::make_unique<RemoteCaptionSource>(GatewayClient(Gateway(cfg, cfg.caption_url)));
        break;
      case PromptMode::kRegistry:
        registry = std::make_unique<PromptRegistry>(PromptRegistry::load(cfg.registry, cfg.lossy));
        source = std::make_unique<RegistryPromptSource>(*registry);
        break;
      case PromptMode::kManifest:
      case PromptMode::kNone:
        break;
    }
  }

  AttributionConfig attribution(const RunConfig& cfg) const {
    return AttributionConfig{cfg.gamma, cfg.scheme, cfg.seed};
  }
};

std::unique_ptr<PromptProvider> MakeProvider(const RunConfig& cfg, const Runtime& rt) {
  switch (cfg.prompt_mode) {
    case PromptMode::kManifest: return std::make_unique<ManifestPrompts>();
    case PromptMode::kRegistry: return std::make_unique<RegistryPrompts>(*rt.registry);
    case PromptMode::kText:
    case PromptMode::kCaptionUrl: return std::make_unique<InvertAttacked>(*rt.source);
    case PromptMode::kNone: break;
  }
  Usage("no prompt source configured");
}

std::vector<fs::path> ImageFiles(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// ---------------------------------------------------------------- commands

void RunAttribute(const RunConfig& cfg) {
  require_run_inputs(cfg, false);
  Runtime rt(cfg);
  const Image image = load_image(cfg.image);
  Attributor attributor(cfg.models, *rt.backend, *rt.comparator, rt.attribution(cfg),
                        rt.cache.get());
  const AttributionResult result = attributor.attribute(image, *rt.source);
  Log("best model: " + result.best);
  WriteJson(cfg.out, ToJson(result));
}

void RunEval(const RunConfig& cfg) {
  require_run_inputs(cfg, true);
  Runtime rt(cfg);
  LabeledDataset dataset = load_manifest(cfg.dataset);
  if (!cfg.models.empty()) dataset.models = cfg.models;
  dataset.Validate();
  const auto provider = MakeProvider(cfg, rt);
  ExperimentOptions options;
  options.workers = cfg.workers;
  options.skip_errors = cfg.skip_errors;
  ExperimentSetup setup{rt.backend.get(), rt.comparator.get(), rt.attribution(cfg), rt.cache.get()};
  Log("evaluating " + std::to_string(dataset.items.size()) + " items over " +
      std::to_string(dataset.models.size()) + " models");

  std::string csv = kCsvHeader;
  json out;
  const bool sweeps = !cfg.sweep_gamma.empty() || !cfg.attacks.empty() || cfg.ablate_ranking;
  if (!sweeps) {
    Attributor attributor(dataset.models, *rt.backend, *rt.comparator, setup.attribution,
                          rt.cache.get());
    EvalReport report = run_experiment(dataset, attributor, *provider, options);
    report.config["extractor"] = rt.comparator->id();
    AppendCsv(csv, report, "base");
    out = ToJson(report);
    Log("accuracy " + std::to_string(report.metrics.accuracy));
  } else {
    out = json::object();
    if (!cfg.sweep_gamma.empty()) {
      json arr = json::array();
      for (const auto& [gamma, report] :
           gamma_sweep(dataset, setup, *provider, cfg.sweep_gamma, options)) {
        arr.push_back({{"gamma", gamma}, {"report", ToJson(report)}});
        AppendCsv(csv, report, "gamma=" + std::to_string(gamma));
        Log("gamma " + std::to_string(gamma) + ": accuracy " + std::to_string(report.metrics.accuracy));
      }
      out["gamma_sweep"] = arr;
    }
    if (!cfg.attacks.empty()) {
      json arr = json::array();
      for (const auto& [attack, report] :
           robustness_sweep(dataset, setup, *provider, cfg.attacks, options)) {
        arr.push_back({{"attack", attack.ToString()}, {"report", ToJson(report)}});
        AppendCsv(csv, report, "attack=" + attack.ToString());
        Log(attack.ToString() + ": accuracy " + std::to_string(report.metrics.accuracy));
      }
      out["robustness"] = arr;
    }
    if (cfg.ablate_ranking) {
      json obj = json::object();
      for (const auto& [name, report] : ranking_ablation(dataset, setup, *provider, options)) {
        obj[name] = ToJson(report);
        AppendCsv(csv, report, "scheme=" + name);
      }
      out["ranking_ablation"] = obj;
    }
  }
  WriteJson(cfg.out, out);
  if (!cfg.csv.empty()) WriteText(cfg.csv.string(), csv);
}

}  // namespace

Commands::Commands(CLI::App& app) {
  AddAttribute(app);
  AddEval(app);
  AddSpectra(app);
  AddAttack(app);
  AddAugment(app);
  AddSynth(app);
}

int Commands::Run() {
  try {
    if (!selected_) Usage("no subcommand");
    selected_();
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "attrib: " << e.what() << '\n';
    return e.code() == ErrorCode::kUsage ? kExitUsage : kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "attrib: " << e.what() << '\n';
    return kExitDomain;
  }
}

void Commands::AddAttribute(CLI::App& app) {
  auto* sub = app.add_subcommand("attribute", "Attribute one image to a candidate model");
  attribute_parser_ = std::make_unique<RunConfigParser>(*sub, false);
  sub->callback([this] {
    selected_ = [this] { RunAttribute(attribute_parser_->finalize()); };
  });
}

void Commands::AddEval(CLI::App& app) {
  auto* sub = app.add_subcommand("eval", "Evaluate attribution over a labelled manifest");
  eval_parser_ = std::make_unique<RunConfigParser>(*sub, true);
  sub->callback([this] { selected_ = [this] { RunEval(eval_parser_->finalize()); }; });
}

void Commands::AddSpectra(CLI::App& app) {
  auto* sub = app.add_subcommand("spectra", "Per-model averaged spectra and RAPS profiles");
  sub->add_option("--dataset", spectra_.dataset, "manifest.jsonl")->required();
  sub->add_option("--out", spectra_.out, "output directory")->required();
  sub->add_option("--max-per-model", spectra_.max_per_model, "images per model (default 1000)");
  sub->callback([this] {
    selected_ = [this] {
      if (spectra_.max_per_model == 0) Usage("--max-per-model must be >= 1");
      const LabeledDataset ds = load_manifest(spectra_.dataset);
      fs::create_directories(spectra_.out);
      for (const auto& model : ds.models) {
        std::vector<Image> images;
        for (const auto& item : ds.items) {
          if (item.label != model) continue;
          if (images.size() == spectra_.max_per_model) break;
          images.push_back(item.load());
        }
        const Spectrum2D mean = average_spectrum(images);
        const RapsProfile profile = raps(mean);
        std::ostringstream csv;
        csv.precision(17);
        csv << "radius,mean_power,count\n";
        for (std::size_t r = 0; r < profile.bins.size(); ++r) {
          csv << r << ',' << profile.bins[r] << ',' << profile.counts[r] << '\n';
        }
        const fs::path dir(spectra_.out);
        WriteText((dir / ("raps_" + model + ".csv")).string(), csv.str());
        save_image(spectrum_heatmap(mean), dir / ("spectrum_" + model + ".png"));
        Log(model + ": averaged " + std::to_string(images.size()) + " spectra");
      }
    };
  });
}

void Commands::AddAttack(CLI::App& app) {
  auto* sub = app.add_subcommand("attack", "Apply blur / JPEG / resize to every image in a directory");
  sub->add_option("--op", attack_.op, "blur | jpeg | resize")->required();
  sub->add_option("--param", attack_.param, "sigma, quality or scale")->required();
  sub->add_option("--in", attack_.in, "input directory")->required();
  sub->add_option("--out", attack_.out, "output directory")->required();
  sub->callback([this] {
    selected_ = [this] {
      AttackConfig attack;
      try {
        std::ostringstream spec;
        spec << attack_.op << ':' << attack_.param;
        attack = AttackConfig::Parse(spec.str());
      } catch (const Error& e) {
        Usage(e.what());
      }
      if (!fs::is_directory(attack_.in)) Usage("--in must be a directory");
      std::size_t n = 0;
      for (const auto& file : ImageFiles(attack_.in)) {
        fs::path rel = fs::relative(file, attack_.in);
        rel.replace_extension(".png");
        const fs::path dst = fs::path(attack_.out) / rel;
        fs::create_directories(dst.parent_path());
        save_image(apply_attack(load_image(file), attack), dst);
        ++n;
      }
      Log("attacked " + std::to_string(n) + " images with " + attack.ToString());
    };
  });
}

void Commands::AddAugment(CLI::App& app) {
  auto* sub = app.add_subcommand("augment", "Regenerate extra labelled images from each item's model");
  sub->add_option("--n-per-image", augment_.n_per_image, "images generated per item (default 10)");
  augment_parser_ = std::make_unique<RunConfigParser>(*sub, true);
  sub->callback([this] {
    selected_ = [this] {
      const RunConfig cfg = augment_parser_->finalize();
      require_run_inputs(cfg, true);
      if (cfg.out.empty() || cfg.out == "-") Usage("augment needs --out DIR");
      Runtime rt(cfg);
      const LabeledDataset ds = load_manifest(cfg.dataset);
      const auto provider = MakeProvider(cfg, rt);
      const LabeledDataset out =
          augment_pool(ds, augment_.n_per_image, *rt.backend, *provider, cfg.seed, cfg.out);
      if (augment_.n_per_image == 0) {
        fs::create_directories(cfg.out);
        write_manifest(out, fs::path(cfg.out) / "manifest.jsonl");
      }
      Log("dataset grew from " + std::to_string(ds.items.size()) + " to " +
          std::to_string(out.items.size()) + " items");
    };
  });
}

void Commands::AddSynth(CLI::App& app) {
  auto* synth = app.add_subcommand("synth", "Synthetic model family tools");
  synth->require_subcommand(1);
  auto* gen = synth->add_subcommand("gen", "Generate a labelled synthetic dataset");
  gen->add_option("--family-seed", synth_.family_seed, "family seed (default 2023)");
  gen->add_option("--k", synth_.k, "number of models (default 4)");
  gen->add_option("--prompts", synth_.prompts, "text file, one prompt per line")->required();
  gen->add_option("--per-prompt", synth_.per_prompt, "images per prompt and model (default 1)");
  gen->add_option("--out", synth_.out, "output directory")->required();
  gen->callback([this] {
    selected_ = [this] {
      if (synth_.per_prompt == 0) Usage("--per-prompt must be >= 1");
      std::vector<SynthModelSpec> family;
      try {
        family = make_family(synth_.k, synth_.family_seed);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kTooMany || e.code() == ErrorCode::kInvalidParam) Usage(e.what());
        throw;
      }
      const auto prompts = load_prompt_lines(synth_.prompts);
      const fs::path out(synth_.out);
      PromptRegistry registry;
      LabeledDataset ds;
      json specs = json::array();
      for (const auto& spec : family) {
        ds.models.push_back(spec.id);
        fs::create_directories(out / spec.id);
        json s = {{"id", spec.id},
                  {"band_center", spec.band_center},
                  {"band_gain", spec.band_gain},
                  {"noise_sigma", spec.noise_sigma},
                  {"output_size", spec.output_size}};
        s["grid_period"] = spec.grid_period ? json(*spec.grid_period) : json(nullptr);
        s["palette_levels"] = spec.palette_levels ? json(*spec.palette_levels) : json(nullptr);
        specs.push_back(s);
      }
      for (std::size_t p = 0; p < prompts.size(); ++p) {
        for (const auto& spec : family) {
          for (std::size_t j = 0; j < synth_.per_prompt; ++j) {
            const Prompt prompt{prompts[p], PromptOrigin::kNatural};
            const Image img =
                synth_generate(spec, prompt, dataset_image_seed(synth_.family_seed, spec.id, p, j));
            std::ostringstream name;
            name << 'p' << std::setw(4) << std::setfill('0') << p << '_' << std::setw(3) << j << ".png";
            DatasetItem item;
            item.path = out / spec.id / name.str();
            item.label = spec.id;
            item.prompt = prompt;
            save_image(img, item.path);
            registry.insert(content_hash(img), prompt.text);
            ds.items.push_back(std::move(item));
          }
        }
      }
      write_manifest(ds, out / "manifest.jsonl");
      registry.save(out / "registry.json");
      WriteText((out / "family.json").string(),
                json({{"family_seed", synth_.family_seed}, {"models", specs}}).dump(2) + "\n");
      Log("wrote " + std::to_string(ds.items.size()) + " images to " + out.string());
    };
  });
}

}  // namespace attrib::cli
