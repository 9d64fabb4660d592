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

#ifndef ATTRIB_PROMPT_HPP_
#define ATTRIB_PROMPT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace attrib {

using ModelId = std::string;

enum class PromptOrigin { kNatural, kGenerated, kSyntheticRegistry };

struct Prompt {
  std::string text;
  PromptOrigin source = PromptOrigin::kNatural;

  bool operator==(const Prompt&) const = default;
};

std::string ToString(PromptOrigin origin);
PromptOrigin ParsePromptOrigin(const std::string& name);

// Lowercased tokens split on whitespace and ASCII punctuation.
std::vector<std::string> tokenize_prompt(std::string_view text);

// Whitespace-separated words, case and punctuation preserved.
std::vector<std::string> split_words(std::string_view text);

}  // namespace attrib

#endif  // ATTRIB_PROMPT_HPP_
