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

#include "attrib/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "attrib/error.hpp"

namespace attrib {

namespace fs = std::filesystem;

Image DatasetItem::load() const { return image ? *image : load_image(path); }

void LabeledDataset::Validate() const {
  if (items.empty()) throw Error(ErrorCode::kEmptyInput, "dataset has no items");
  if (models.empty()) throw Error(ErrorCode::kEmptyInput, "dataset has no models");
  const std::set<ModelId> known(models.begin(), models.end());
  for (const auto& item : items) {
    if (!known.count(item.label)) {
      throw Error(ErrorCode::kUnknownLabel, "label '" + item.label + "' is not a candidate model");
    }
  }
}

LabeledDataset load_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCode::kIo, "cannot read manifest '" + manifest.string() + "'");
  const fs::path base = manifest.parent_path();
  LabeledDataset ds;
  std::set<ModelId> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DatasetItem item;
      item.path = j.at("path").get<std::string>();
      if (item.path.is_relative()) item.path = base / item.path;
      item.label = j.at("label").get<std::string>();
      if (j.contains("prompt") && j["prompt"].is_string() &&
          !j["prompt"].get<std::string>().empty()) {
        item.prompt = Prompt{j["prompt"].get<std::string>(), PromptOrigin::kNatural};
      }
      labels.insert(item.label);
      ds.items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kDecode, manifest.string() + ":" + std::to_string(lineno) + ": " +
                                          e.what());
    }
  }
  if (ds.items.empty()) throw Error(ErrorCode::kEmptyInput, "manifest '" + manifest.string() + "' has no items");
  ds.models.assign(labels.begin(), labels.end());
  return ds;
}

void write_manifest(const LabeledDataset& dataset, const fs::path& manifest) {
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest '" + manifest.string() + "'");
  const fs::path base = manifest.parent_path().empty() ? fs::path(".") : manifest.parent_path();
  for (const auto& item : dataset.items) {
    std::error_code ec;
    fs::path rel = fs::relative(item.path, base, ec);
    if (ec || rel.empty() || *rel.begin() == "..") rel = item.path;
    nlohmann::json j = {{"path", rel.generic_string()}, {"label", item.label}};
    if (item.prompt) j["prompt"] = item.prompt->text;
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + manifest.string() + "'");
}

std::vector<std::string> load_prompt_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read prompts '" + path.string() + "'");
  std::vector<std::string> prompts;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    const auto first = line.find_first_not_of(' ');
    if (first == std::string::npos) continue;
    prompts.push_back(line.substr(first));
  }
  if (prompts.empty()) throw Error(ErrorCode::kEmptyInput, "no prompts in '" + path.string() + "'");
  return prompts;
}

}  // namespace attrib
