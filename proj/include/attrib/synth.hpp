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

#ifndef ATTRIB_SYNTH_HPP_
#define ATTRIB_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "attrib/backend.hpp"
#include "attrib/image.hpp"
#include "attrib/prompt.hpp"

namespace attrib {

// Deterministic parametric stand-in for a text-to-image model. The prompt
// drives a smooth base texture shared by every model; the fingerprint fields
// add model-specific spectral structure on top. Algorithm in
// docs/synth_contract.md.
struct SynthModelSpec {
  ModelId id;
  double band_center = 0.1;  // cycles per pixel, (0, 0.5)
  double band_gain = 8.0;    // RMS amplitude of the band-pass component
  std::optional<std::uint32_t> grid_period;
  std::optional<std::uint32_t> palette_levels;
  double noise_sigma = 3.0;
  std::uint32_t output_size = 256;

  bool SameFingerprint(const SynthModelSpec& other) const;
};

inline constexpr std::size_t kFamilyPaletteSize = 8;

// k specs named m1..mk with pairwise-distinct fingerprints. Consecutive
// members have adjacent band centers. Throws TooMany for k > 8.
std::vector<SynthModelSpec> make_family(std::size_t k, std::uint64_t master_seed);

Image synth_generate(const SynthModelSpec& spec, const Prompt& prompt, std::uint64_t seed);

// The prompt-only component of synth_generate, before fingerprints and noise.
Image synth_base_texture(const Prompt& prompt, std::uint32_t size);

// Every third word removed (positions 3, 6, ...), at least one word kept.
std::string lossy_paraphrase(const std::string& text);

// Content-hash -> generating prompt. Insert-once; safe for concurrent use.
class PromptRegistry {
 public:
  explicit PromptRegistry(bool lossy_mode = false) : lossy_(lossy_mode) {}
  PromptRegistry(const PromptRegistry& other);
  PromptRegistry& operator=(const PromptRegistry&) = delete;

  // False when the hash is already present (the stored prompt is kept).
  bool insert(const std::string& hash, const std::string& prompt_text);
  std::optional<std::string> lookup(const std::string& hash) const;
  std::size_t size() const;

  bool lossy_mode() const noexcept { return lossy_; }
  void set_lossy_mode(bool lossy) noexcept { lossy_ = lossy; }

  // {"entries": {"<hash>": "<prompt>", ...}}
  void save(const std::filesystem::path& path) const;
  static PromptRegistry load(const std::filesystem::path& path, bool lossy_mode);

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> entries_;
  bool lossy_;
};

// Stored prompt (Natural) or its lossy paraphrase (Generated).
// Throws RegistryMiss.
Prompt registry_caption(const PromptRegistry& registry, const Image& image);

class RegistryPromptSource final : public PromptSource {
 public:
  explicit RegistryPromptSource(const PromptRegistry& registry) : registry_(registry) {}
  Prompt invert(const Image& image) const override;

 private:
  const PromptRegistry& registry_;
};

class SyntheticBackend final : public GenerationBackend {
 public:
  explicit SyntheticBackend(std::vector<SynthModelSpec> family);
  std::vector<Image> generate(const ModelId& model_id, const Prompt& prompt, std::size_t n,
                              std::uint64_t seed) const override;
  bool has_model(const ModelId& model_id) const override;
  const std::vector<SynthModelSpec>& family() const noexcept { return family_; }
  const SynthModelSpec& spec(const ModelId& model_id) const;

 private:
  std::vector<SynthModelSpec> family_;
};

// Seed of the j-th dataset image for (model, prompt index); kept in a
// different stream from candidate seeds so test images never reappear in
// candidate pools.
std::uint64_t dataset_image_seed(std::uint64_t family_seed, const ModelId& model_id,
                                 std::uint64_t prompt_index, std::uint64_t j);

}  // namespace attrib

#endif  // ATTRIB_SYNTH_HPP_
