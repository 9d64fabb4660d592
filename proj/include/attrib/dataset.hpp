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

#ifndef ATTRIB_DATASET_HPP_
#define ATTRIB_DATASET_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "attrib/image.hpp"
#include "attrib/prompt.hpp"

namespace attrib {

struct DatasetItem {
  std::filesystem::path path;
  ModelId label;
  std::optional<Prompt> prompt;
  // Set for in-memory datasets; otherwise the image is loaded from path.
  std::optional<Image> image;

  Image load() const;
};

struct LabeledDataset {
  std::vector<DatasetItem> items;
  std::vector<ModelId> models;

  // Throws UnknownLabel / EmptyInput.
  void Validate() const;
};

// One JSON object per line: {"path": ..., "label": ..., "prompt": ...}.
// Relative paths resolve against the manifest's directory. models is the
// sorted set of labels.
LabeledDataset load_manifest(const std::filesystem::path& manifest);
// Paths are written relative to the manifest directory when possible.
void write_manifest(const LabeledDataset& dataset, const std::filesystem::path& manifest);

// Non-empty lines of a prompts file.
std::vector<std::string> load_prompt_lines(const std::filesystem::path& path);

}  // namespace attrib

#endif  // ATTRIB_DATASET_HPP_
