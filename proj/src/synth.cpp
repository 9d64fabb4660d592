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

#include "attrib/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "attrib/error.hpp"
#include "attrib/hashing.hpp"

namespace attrib {

namespace {

struct PaletteEntry {
  double band_center;
  double band_gain;
  std::uint32_t grid_period;     // 0 = none
  std::uint32_t palette_levels;  // 0 = none
  double noise_sigma;
};

// Cyclic order chosen so that every window of four consecutive entries holds
// at least two bands below 0.25 cycles/pixel (these survive blur and 2x
// downscaling) and at least one pair of neighbouring band centers.
constexpr std::array<PaletteEntry, kFamilyPaletteSize> kPalette = {{
    {0.06, 10.0, 0, 0, 4.0},
    {0.10, 10.0, 8, 0, 4.0},
    {0.30, 10.0, 0, 16, 4.0},
    {0.36, 10.0, 4, 0, 4.0},
    {0.14, 10.0, 0, 24, 4.0},
    {0.19, 10.0, 0, 0, 4.0},
    {0.42, 10.0, 0, 0, 4.0},
    {0.24, 10.0, 16, 0, 4.0},
}};

constexpr int kBandWaves = 16;
constexpr double kGridGain = 10.0;
constexpr std::array<std::uint32_t, 2> kOctaveCell = {64, 32};
constexpr std::array<double, 2> kOctaveAmp = {48.0, 24.0};

double Smoothstep(double f) { return f * f * (3.0 - 2.0 * f); }

// Round half away from zero; after clamping v is non-negative.
std::uint8_t ToSample(double v) {
  return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 255.0) + 0.5));
}

// Base texture as doubles, channel-interleaved.
std::vector<double> BaseTexture(const std::string& text, std::uint32_t size) {
  Xoshiro256 rng(splitmix64_mix(fnv1a64(text)));
  std::array<double, 3> mean{};
  for (auto& m : mean) m = 64.0 + 128.0 * rng.uniform();

  const std::size_t n = static_cast<std::size_t>(size) * size;
  std::vector<double> out(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) out[3 * i + c] = mean[c];
  }
  for (std::size_t o = 0; o < kOctaveCell.size(); ++o) {
    const std::uint32_t cell = kOctaveCell[o];
    const std::uint32_t lattice = size / cell + 2;
    for (int c = 0; c < 3; ++c) {
      std::vector<double> grid(static_cast<std::size_t>(lattice) * lattice);
      for (auto& g : grid) g = 2.0 * rng.uniform() - 1.0;
      for (std::uint32_t y = 0; y < size; ++y) {
        const double ty = (y + 0.5) / cell;
        const auto gy = static_cast<std::uint32_t>(ty);
        const double sy = Smoothstep(ty - gy);
        for (std::uint32_t x = 0; x < size; ++x) {
          const double tx = (x + 0.5) / cell;
          const auto gx = static_cast<std::uint32_t>(tx);
          const double sx = Smoothstep(tx - gx);
          auto g = [&](std::uint32_t i, std::uint32_t j) { return grid[j * lattice + i]; };
          const double top = g(gx, gy) + (g(gx + 1, gy) - g(gx, gy)) * sx;
          const double bottom = g(gx, gy + 1) + (g(gx + 1, gy + 1) - g(gx, gy + 1)) * sx;
          out[3 * (static_cast<std::size_t>(y) * size + x) + c] +=
              kOctaveAmp[o] * (top + (bottom - top) * sy);
        }
      }
    }
  }
  return out;
}

// Every image of a pool shares its prompt, so the last texture is reused.
const std::vector<double>& CachedBaseTexture(const std::string& text, std::uint32_t size) {
  thread_local std::string last_text;
  thread_local std::uint32_t last_size = 0;
  thread_local std::vector<double> last;
  if (last.empty() || last_size != size || last_text != text) {
    last = BaseTexture(text, size);
    last_text = text;
    last_size = size;
  }
  return last;
}

}  // namespace

bool SynthModelSpec::SameFingerprint(const SynthModelSpec& other) const {
  return band_center == other.band_center && band_gain == other.band_gain &&
         grid_period == other.grid_period && palette_levels == other.palette_levels;
}

std::vector<SynthModelSpec> make_family(std::size_t k, std::uint64_t master_seed) {
  if (k == 0) throw Error(ErrorCode::kInvalidParam, "family size must be >= 1");
  if (k > kFamilyPaletteSize) {
    throw Error(ErrorCode::kTooMany, "at most " + std::to_string(kFamilyPaletteSize) +
                                         " distinct fingerprints are available");
  }
  Xoshiro256 rng(master_seed);
  const std::size_t offset = rng.next() % kFamilyPaletteSize;
  std::vector<SynthModelSpec> family;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& e = kPalette[(offset + i) % kFamilyPaletteSize];
    SynthModelSpec spec;
    spec.id = "m" + std::to_string(i + 1);
    spec.band_center = e.band_center;
    spec.band_gain = e.band_gain;
    if (e.grid_period) spec.grid_period = e.grid_period;
    if (e.palette_levels) spec.palette_levels = e.palette_levels;
    spec.noise_sigma = e.noise_sigma;
    family.push_back(std::move(spec));
  }
  return family;
}

Image synth_base_texture(const Prompt& prompt, std::uint32_t size) {
  const auto base = BaseTexture(prompt.text, size);
  std::vector<std::uint8_t> px(base.size());
  std::transform(base.begin(), base.end(), px.begin(), ToSample);
  return Image(size, size, 3, std::move(px));
}

Image synth_generate(const SynthModelSpec& spec, const Prompt& prompt, std::uint64_t seed) {
  const std::uint32_t size = spec.output_size;
  const std::vector<double>& px = CachedBaseTexture(prompt.text, size);
  Xoshiro256 rng(seed);

  // Band-pass component: random orientations and phases on a ring of radius
  // band_center. cos(a x + b y + p) is split into row and column tables.
  std::vector<double> fingerprint(static_cast<std::size_t>(size) * size, 0.0);
  if (spec.band_gain != 0.0) {
    const double amp = spec.band_gain / std::sqrt(kBandWaves / 2.0);
    std::vector<double> cx(size), sx(size), cy(size), sy(size);
    for (int wv = 0; wv < kBandWaves; ++wv) {
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      const double phase = 2.0 * std::numbers::pi * rng.uniform();
      const double kx = 2.0 * std::numbers::pi * spec.band_center * std::cos(theta);
      const double ky = 2.0 * std::numbers::pi * spec.band_center * std::sin(theta);
      for (std::uint32_t i = 0; i < size; ++i) {
        cx[i] = std::cos(kx * i + phase);
        sx[i] = std::sin(kx * i + phase);
        cy[i] = std::cos(ky * i);
        sy[i] = std::sin(ky * i);
      }
      for (std::uint32_t y = 0; y < size; ++y) {
        double* row = fingerprint.data() + static_cast<std::size_t>(y) * size;
        for (std::uint32_t x = 0; x < size; ++x) row[x] += amp * (cx[x] * cy[y] - sx[x] * sy[y]);
      }
    }
  }
  if (spec.grid_period) {
    const std::uint32_t p = *spec.grid_period;
    for (std::uint32_t y = 0; y < size; ++y) {
      for (std::uint32_t x = 0; x < size; ++x) {
        fingerprint[static_cast<std::size_t>(y) * size + x] +=
            kGridGain * ((x % p == 0 ? 1.0 : 0.0) + (y % p == 0 ? 1.0 : 0.0));
      }
    }
  }

  const double step = spec.palette_levels ? 255.0 / (*spec.palette_levels - 1) : 0.0;
  std::vector<std::uint8_t> out(px.size());
  for (std::size_t i = 0; i < fingerprint.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      double v = px[3 * i + c] + fingerprint[i];
      if (spec.noise_sigma != 0.0) v += spec.noise_sigma * rng.normal();
      if (spec.palette_levels) v = std::round(std::clamp(v, 0.0, 255.0) / step) * step;
      out[3 * i + c] = ToSample(v);
    }
  }
  return Image(size, size, 3, std::move(out));
}

std::string lossy_paraphrase(const std::string& text) {
  const auto words = split_words(text);
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if ((i + 1) % 3 == 0) continue;
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  if (out.empty() && !words.empty()) out = words.front();
  return out;
}

// ---------------------------------------------------------------- registry

PromptRegistry::PromptRegistry(const PromptRegistry& other) : lossy_(other.lossy_) {
  std::lock_guard<std::mutex> lock(other.mu_);
  entries_ = other.entries_;
}

bool PromptRegistry::insert(const std::string& hash, const std::string& prompt_text) {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.emplace(hash, prompt_text).second;
}

std::optional<std::string> PromptRegistry::lookup(const std::string& hash) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(hash);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t PromptRegistry::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

void PromptRegistry::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  {
    std::lock_guard<std::mutex> lock(mu_);
    j["entries"] = entries_;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write registry '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& path, bool lossy_mode) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read registry '" + path.string() + "'");
  PromptRegistry reg(lossy_mode);
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& [hash, text] : j.at("entries").items()) {
      reg.insert(hash, text.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kDecode, "registry '" + path.string() + "': " + e.what());
  }
  return reg;
}

Prompt registry_caption(const PromptRegistry& registry, const Image& image) {
  const auto stored = registry.lookup(content_hash(image));
  if (!stored) throw Error(ErrorCode::kRegistryMiss, "image not present in prompt registry");
  if (registry.lossy_mode()) return Prompt{lossy_paraphrase(*stored), PromptOrigin::kGenerated};
  return Prompt{*stored, PromptOrigin::kNatural};
}

Prompt RegistryPromptSource::invert(const Image& image) const {
  try {
    return registry_caption(registry_, image);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kRegistryMiss) {
      throw Error(ErrorCode::kPromptUnavailable, e.what());
    }
    throw;
  }
}

// ---------------------------------------------------------------- backend

SyntheticBackend::SyntheticBackend(std::vector<SynthModelSpec> family)
    : family_(std::move(family)) {}

const SynthModelSpec& SyntheticBackend::spec(const ModelId& model_id) const {
  auto it = std::find_if(family_.begin(), family_.end(),
                         [&](const SynthModelSpec& s) { return s.id == model_id; });
  if (it == family_.end()) {
    throw Error(ErrorCode::kGenerationFailed, "unknown synthetic model '" + model_id + "'");
  }
  return *it;
}

bool SyntheticBackend::has_model(const ModelId& model_id) const {
  return std::any_of(family_.begin(), family_.end(),
                     [&](const SynthModelSpec& s) { return s.id == model_id; });
}

std::vector<Image> SyntheticBackend::generate(const ModelId& model_id, const Prompt& prompt,
                                              std::size_t n, std::uint64_t seed) const {
  const auto& s = spec(model_id);
  std::vector<Image> images;
  images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    images.push_back(synth_generate(s, prompt, derive_seed(seed, model_id, i)));
  }
  return images;
}

std::uint64_t dataset_image_seed(std::uint64_t family_seed, const ModelId& model_id,
                                 std::uint64_t prompt_index, std::uint64_t j) {
  constexpr std::uint64_t kDatasetStream = 0xda7a5e7da7a5e7ULL;
  return derive_seed(splitmix64_mix(family_seed ^ kDatasetStream), model_id,
                     (prompt_index << 20) | j);
}

}  // namespace attrib
