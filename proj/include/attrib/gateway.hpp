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

#ifndef ATTRIB_GATEWAY_HPP_
#define ATTRIB_GATEWAY_HPP_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "attrib/backend.hpp"
#include "attrib/feature.hpp"
#include "attrib/image.hpp"
#include "attrib/prompt.hpp"

namespace attrib {

struct GatewayConfig {
  std::string base_url;  // scheme://host:port
  int timeout_ms = 30000;
  int retries = 2;  // extra attempts after the first
  int backoff_ms = 100;  // doubled after every failed attempt
  std::optional<std::string> api_key;  // sent as X-Api-Key
};

// Client for wire protocol v1 (JSON over HTTP). Thread-safe: each call opens
// its own connection. Transport failures and 5xx responses are retried with
// the identical request body; 4xx responses fail immediately.
class GatewayClient {
 public:
  explicit GatewayClient(GatewayConfig config);

  std::vector<Image> remote_generate(const ModelId& model_id, const std::string& prompt,
                                     std::size_t n, std::optional<std::uint64_t> seed) const;
  Prompt remote_caption(const Image& image) const;
  FeatureVector remote_embed(const Image& image) const;

  const GatewayConfig& config() const noexcept { return config_; }

 private:
  std::string Post(const std::string& path, const std::string& body) const;

  GatewayConfig config_;
};

class RemoteBackend final : public GenerationBackend {
 public:
  explicit RemoteBackend(GatewayClient client) : client_(std::move(client)) {}
  std::vector<Image> generate(const ModelId& model_id, const Prompt& prompt, std::size_t n,
                              std::uint64_t seed) const override {
    return client_.remote_generate(model_id, prompt.text, n, seed);
  }
  bool has_model(const ModelId&) const override { return true; }

 private:
  GatewayClient client_;
};

class RemoteCaptionSource final : public PromptSource {
 public:
  explicit RemoteCaptionSource(GatewayClient client) : client_(std::move(client)) {}
  Prompt invert(const Image& image) const override;

 private:
  GatewayClient client_;
};

class RemoteEmbedExtractor final : public FeatureExtractor {
 public:
  explicit RemoteEmbedExtractor(GatewayClient client) : client_(std::move(client)) {}
  FeatureVector extract(const Image& image) const override {
    return client_.remote_embed(image);
  }
  std::string id() const override { return "embed"; }

 private:
  GatewayClient client_;
};

// On-disk candidate pools:
//   <root>/pools/<sha256(prompt)>/<model_id>/manifest.json, 000.png, ...
// Entries are written to a temporary directory and renamed into place, and a
// per-entry lock file serializes concurrent requests for the same entry.
class PoolCache {
 public:
  using Producer = std::function<std::vector<Image>(std::size_t gamma)>;

  explicit PoolCache(std::filesystem::path root, std::string tool_version = "1.0.0");

  // Cached images when an entry with the same seed and at least `gamma`
  // images exists (first gamma returned); otherwise produce, persist, return.
  std::vector<Image> get_or_generate(const Prompt& prompt, const ModelId& model_id,
                                     std::size_t gamma, std::uint64_t seed,
                                     const Producer& producer) const;

  std::filesystem::path entry_dir(const Prompt& prompt, const ModelId& model_id) const;

  // Called after the temporary entry is fully written, before it is renamed
  // into place. Tests throw from here to emulate a crash.
  void set_fault_hook(std::function<void()> hook) { fault_hook_ = std::move(hook); }

  std::size_t producer_calls() const noexcept { return producer_calls_.load(); }

 private:
  std::optional<std::vector<Image>> TryLoad(const std::filesystem::path& dir,
                                            const Prompt& prompt, const ModelId& model_id,
                                            std::size_t gamma, std::uint64_t seed) const;
  void Store(const std::filesystem::path& dir, const Prompt& prompt, const ModelId& model_id,
             std::uint64_t seed, const std::vector<Image>& images) const;

  std::filesystem::path root_;
  std::string tool_version_;
  std::function<void()> fault_hook_;
  mutable std::atomic<std::size_t> producer_calls_{0};
};

std::vector<Image> pool_cache_get_or_generate(const std::filesystem::path& cache_dir,
                                              const Prompt& prompt, const ModelId& model_id,
                                              std::size_t gamma, std::uint64_t seed,
                                              const PoolCache::Producer& producer);

}  // namespace attrib

#endif  // ATTRIB_GATEWAY_HPP_
