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

#include "attrib/prompt.hpp"

#include <cctype>

#include "attrib/error.hpp"

namespace attrib {

std::string ToString(PromptOrigin origin) {
  switch (origin) {
    case PromptOrigin::kNatural: return "natural";
    case PromptOrigin::kGenerated: return "generated";
    case PromptOrigin::kSyntheticRegistry: return "synthetic_registry";
  }
  return "?";
}

PromptOrigin ParsePromptOrigin(const std::string& name) {
  if (name == "natural") return PromptOrigin::kNatural;
  if (name == "generated") return PromptOrigin::kGenerated;
  if (name == "synthetic_registry") return PromptOrigin::kSyntheticRegistry;
  throw Error(ErrorCode::kInvalidParam, "unknown prompt source '" + name + "'");
}

std::vector<std::string> tokenize_prompt(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || std::ispunct(c)) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

}  // namespace attrib
