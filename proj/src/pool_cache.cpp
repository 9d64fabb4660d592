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

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "attrib/error.hpp"
#include "attrib/gateway.hpp"
#include "attrib/hashing.hpp"

namespace attrib {

namespace fs = std::filesystem;

namespace {

class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open lock '" + path.string() + "'");
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::kIo, "cannot lock '" + path.string() + "'");
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

std::string ImageName(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03zu.png", i);
  return buf;
}

std::string UniqueSuffix() {
  static std::atomic<std::uint64_t> counter{0};
  return std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)) + "-" +
         std::to_string(std::random_device{}());
}

}  // namespace

PoolCache::PoolCache(fs::path root, std::string tool_version)
    : root_(std::move(root)), tool_version_(std::move(tool_version)) {}

fs::path PoolCache::entry_dir(const Prompt& prompt, const ModelId& model_id) const {
  return root_ / "pools" / sha256_hex(prompt.text) / model_id;
}

std::optional<std::vector<Image>> PoolCache::TryLoad(const fs::path& dir, const Prompt& prompt,
                                                     const ModelId& model_id,
                                                     std::size_t gamma,
                                                     std::uint64_t seed) const {
  std::ifstream in(dir / "manifest.json");
  if (!in) return std::nullopt;
  try {
    const auto m = nlohmann::json::parse(in);
    if (m.at("prompt").get<std::string>() != prompt.text ||
        m.at("model_id").get<std::string>() != model_id ||
        m.at("seed").get<std::uint64_t>() != seed) {
      return std::nullopt;
    }
    const auto cached = m.at("gamma").get<std::size_t>();
    if (cached < gamma) return std::nullopt;
    for (std::size_t i = 0; i < cached; ++i) {
      if (!fs::is_regular_file(dir / ImageName(i))) return std::nullopt;
    }
    std::vector<Image> images;
    images.reserve(gamma);
    for (std::size_t i = 0; i < gamma; ++i) images.push_back(load_image(dir / ImageName(i)));
    return images;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  } catch (const Error&) {
    return std::nullopt;
  }
}

void PoolCache::Store(const fs::path& dir, const Prompt& prompt, const ModelId& model_id,
                      std::uint64_t seed, const std::vector<Image>& images) const {
  const fs::path parent = dir.parent_path();
  const fs::path tmp = parent / (".tmp-" + model_id + "-" + UniqueSuffix());
  struct Cleanup {
    fs::path path;
    ~Cleanup() {
      std::error_code ec;
      if (!path.empty()) fs::remove_all(path, ec);
    }
  } cleanup{tmp};

  fs::create_directories(tmp);
  for (std::size_t i = 0; i < images.size(); ++i) save_image(images[i], tmp / ImageName(i));
  const nlohmann::json manifest = {
      {"prompt", prompt.text},
      {"model_id", model_id},
      {"gamma", images.size()},
      {"seed", seed},
      {"created_unix", std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count()},
      {"tool_version", tool_version_},
  };
  {
    std::ofstream out(tmp / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIo, "cannot write manifest in '" + tmp.string() + "'");
  }
  if (fault_hook_) fault_hook_();

  std::error_code ec;
  if (fs::exists(dir)) {
    const fs::path old = parent / (".old-" + model_id + "-" + UniqueSuffix());
    fs::rename(dir, old, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot retire '" + dir.string() + "': " + ec.message());
    fs::rename(tmp, dir, ec);
    fs::remove_all(old);
  } else {
    fs::rename(tmp, dir, ec);
  }
  if (ec) throw Error(ErrorCode::kIo, "cannot publish '" + dir.string() + "': " + ec.message());
  cleanup.path.clear();
}

std::vector<Image> PoolCache::get_or_generate(const Prompt& prompt, const ModelId& model_id,
                                              std::size_t gamma, std::uint64_t seed,
                                              const Producer& producer) const {
  if (gamma == 0) throw Error(ErrorCode::kInvalidParam, "gamma must be >= 1");
  const fs::path dir = entry_dir(prompt, model_id);
  std::error_code ec;
  fs::create_directories(dir.parent_path(), ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create '" + dir.parent_path().string() + "': " +
                                    ec.message());
  }
  FileLock lock(dir.parent_path() / ("." + model_id + ".lock"));
  if (auto cached = TryLoad(dir, prompt, model_id, gamma, seed)) return std::move(*cached);

  ++producer_calls_;
  std::vector<Image> images = producer(gamma);
  if (images.size() != gamma) {
    throw Error(ErrorCode::kCountMismatch, "producer returned " + std::to_string(images.size()) +
                                               " images, expected " + std::to_string(gamma));
  }
  Store(dir, prompt, model_id, seed, images);
  return images;
}

std::vector<Image> pool_cache_get_or_generate(const fs::path& cache_dir, const Prompt& prompt,
                                              const ModelId& model_id, std::size_t gamma,
                                              std::uint64_t seed,
                                              const PoolCache::Producer& producer) {
  return PoolCache(cache_dir).get_or_generate(prompt, model_id, gamma, seed, producer);
}

}  // namespace attrib
