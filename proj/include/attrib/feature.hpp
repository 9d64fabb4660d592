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

#ifndef ATTRIB_FEATURE_HPP_
#define ATTRIB_FEATURE_HPP_

#include <string>
#include <vector>

#include "attrib/image.hpp"

namespace attrib {

struct FeatureVector {
  std::vector<double> values;
  std::string extractor_id;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

// extract() must be deterministic and return a fixed dimension per instance.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual FeatureVector extract(const Image& image) const = 0;
  virtual std::string id() const = 0;
};

}  // namespace attrib

#endif  // ATTRIB_FEATURE_HPP_
