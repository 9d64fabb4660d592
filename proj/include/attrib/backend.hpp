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

#ifndef ATTRIB_BACKEND_HPP_
#define ATTRIB_BACKEND_HPP_

#include <cstdint>
#include <vector>

#include "attrib/image.hpp"
#include "attrib/prompt.hpp"

namespace attrib {

// Source of candidate images. Image i of a request must depend only on
// (model_id, prompt, seed, i) so that a pool of n images is a prefix of any
// larger pool requested with the same seed.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::vector<Image> generate(const ModelId& model_id, const Prompt& prompt,
                                      std::size_t n, std::uint64_t seed) const = 0;
  virtual bool has_model(const ModelId& model_id) const = 0;
};

// Maps an image back to a prompt (prompt inversion).
class PromptSource {
 public:
  virtual ~PromptSource() = default;
  virtual Prompt invert(const Image& image) const = 0;
};

}  // namespace attrib

#endif  // ATTRIB_BACKEND_HPP_
