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

#include "attrib/gateway.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "attrib/error.hpp"
#include "attrib/hashing.hpp"

namespace attrib {

namespace {

using nlohmann::json;

std::string EncodeImage(const Image& image) { return base64_encode(encode_png(image)); }

// Python's json module emits bare NaN / Infinity; rewrite them to null
// outside of strings so the body still parses and the caller can reject them.
std::string NullifyNonFiniteLiterals(const std::string& body) {
  std::string out;
  out.reserve(body.size());
  bool in_string = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < body.size()) {
        out.push_back(body[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    bool replaced = false;
    for (std::string_view lit : {"-Infinity", "Infinity", "NaN"}) {
      if (body.compare(i, lit.size(), lit) == 0) {
        out += "null";
        i += lit.size() - 1;
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(c);
  }
  return out;
}

json ParseBody(const std::string& body) {
  try {
    return json::parse(NullifyNonFiniteLiterals(body));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("response is not JSON: ") + e.what());
  }
}

}  // namespace

GatewayClient::GatewayClient(GatewayConfig config) : config_(std::move(config)) {
  if (config_.timeout_ms <= 0) {
    throw Error(ErrorCode::kInvalidParam, "gateway timeout must be > 0");
  }
  if (config_.retries < 0) throw Error(ErrorCode::kInvalidParam, "retries must be >= 0");
}

std::string GatewayClient::Post(const std::string& path, const std::string& body) const {
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  httplib::Headers headers;
  if (config_.api_key) headers.emplace("X-Api-Key", *config_.api_key);

  std::string last_failure;
  int backoff = config_.backoff_ms;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0 && backoff > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;

    std::string detail = "HTTP " + std::to_string(res->status);
    try {
      const auto j = json::parse(res->body);
      detail += " " + j.value("error", std::string("unknown")) + ": " +
                j.value("message", std::string());
    } catch (const json::exception&) {
    }
    if (res->status >= 500) {
      last_failure = detail;
      continue;
    }
    throw Error(ErrorCode::kRemote, path + ": " + detail);
  }
  // Exhausted retries on a service that keeps answering 5xx is a remote
  // failure; no answer at all is a transport failure.
  if (last_failure.rfind("HTTP", 0) == 0) {
    throw Error(ErrorCode::kRemote, path + ": " + last_failure);
  }
  throw Error(ErrorCode::kTransport, path + ": " + last_failure);
}

std::vector<Image> GatewayClient::remote_generate(const ModelId& model_id,
                                                  const std::string& prompt, std::size_t n,
                                                  std::optional<std::uint64_t> seed) const {
  if (n == 0) throw Error(ErrorCode::kInvalidParam, "n must be >= 1");
  json req = {{"model_id", model_id}, {"prompt", prompt}, {"n", n}};
  if (seed) req["seed"] = *seed;
  const json res = ParseBody(Post("/v1/generate", req.dump()));
  if (!res.is_object() || !res.contains("images") || !res["images"].is_array()) {
    throw Error(ErrorCode::kProtocol, "/v1/generate: missing 'images' array");
  }
  const auto& arr = res["images"];
  if (arr.size() != n) {
    throw Error(ErrorCode::kCountMismatch, "/v1/generate: asked for " + std::to_string(n) +
                                               " images, got " + std::to_string(arr.size()));
  }
  std::vector<Image> images;
  images.reserve(n);
  for (const auto& item : arr) {
    if (!item.is_string()) throw Error(ErrorCode::kProtocol, "/v1/generate: image is not a string");
    try {
      images.push_back(decode_image(base64_decode(item.get<std::string>())));
    } catch (const Error& e) {
      throw Error(ErrorCode::kProtocol, std::string("/v1/generate: bad image: ") + e.what());
    }
  }
  return images;
}

Prompt GatewayClient::remote_caption(const Image& image) const {
  const json req = {{"image", EncodeImage(image)}};
  const json res = ParseBody(Post("/v1/caption", req.dump()));
  if (!res.is_object() || !res.contains("prompt") || !res["prompt"].is_string()) {
    throw Error(ErrorCode::kProtocol, "/v1/caption: missing 'prompt' string");
  }
  auto text = res["prompt"].get<std::string>();
  if (text.empty()) throw Error(ErrorCode::kProtocol, "/v1/caption: empty prompt");
  return Prompt{std::move(text), PromptOrigin::kGenerated};
}

FeatureVector GatewayClient::remote_embed(const Image& image) const {
  const json req = {{"image", EncodeImage(image)}};
  const json res = ParseBody(Post("/v1/embed", req.dump()));
  if (!res.is_object() || !res.contains("vector") || !res["vector"].is_array() ||
      !res.contains("dim") || !res["dim"].is_number_integer()) {
    throw Error(ErrorCode::kProtocol, "/v1/embed: expected {vector, dim}");
  }
  const auto& arr = res["vector"];
  if (res["dim"].get<long long>() != static_cast<long long>(arr.size()) || arr.empty()) {
    throw Error(ErrorCode::kProtocol, "/v1/embed: dim does not match vector length");
  }
  FeatureVector fv;
  fv.extractor_id = "embed";
  fv.values.reserve(arr.size());
  for (const auto& v : arr) {
    if (v.is_null()) throw Error(ErrorCode::kNonFinite, "/v1/embed: non-finite entry");
    if (!v.is_number()) throw Error(ErrorCode::kProtocol, "/v1/embed: non-numeric entry");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorCode::kNonFinite, "/v1/embed: non-finite entry");
    fv.values.push_back(d);
  }
  return fv;
}

Prompt RemoteCaptionSource::invert(const Image& image) const {
  try {
    return client_.remote_caption(image);
  } catch (const Error& e) {
    throw Error(ErrorCode::kPromptUnavailable, e.what());
  }
}

}  // namespace attrib
