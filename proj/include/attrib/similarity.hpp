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

#ifndef ATTRIB_SIMILARITY_HPP_
#define ATTRIB_SIMILARITY_HPP_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrib/feature.hpp"
#include "attrib/image.hpp"

namespace attrib {

struct SimScoreSet {
  std::string model_id;
  std::vector<double> scores;
};

// dot(a,b) / (|a| |b|), clamped to [-1, 1].
// Throws DimensionMismatch or ZeroVector.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Mean SSIM over all valid 11x11 windows (Gaussian sigma 1.5, K1 = 0.01,
// K2 = 0.03, L = 255) on the grayscale versions of both images.
// Throws DimensionMismatch or TooSmall.
double ssim(const Image& a, const Image& b);

// Weighted mean of feature cosine and SSIM, both computed after resizing to
// the analysis size. weight is the cosine share.
double combined_score(const Image& test, const Image& candidate,
                      const FeatureExtractor& extractor, double weight = 0.5);

// Cosine of the test feature against every pool feature, in pool order.
// Throws EmptyPool or DimensionMismatch.
SimScoreSet score_pool(const FeatureVector& test_feature,
                       std::span<const FeatureVector> pool_features,
                       const std::string& model_id);

enum class SimilarityMethod { kSpectral, kEmbed, kSsim, kCombined };

SimilarityMethod ParseSimilarityMethod(const std::string& name);
std::string ToString(SimilarityMethod method);

// What a comparator needs to keep per image; computed once per candidate so
// pools can be scored against many test images.
struct Representation {
  std::optional<FeatureVector> feature;
  std::optional<Image> analysis_gray;
};

// Binds a similarity method to the extractor it uses. kSsim ignores the
// extractor; kCombined uses it for the cosine half.
class Comparator {
 public:
  Comparator(SimilarityMethod method, std::shared_ptr<const FeatureExtractor> extractor,
             double combined_weight = 0.5);

  Representation represent(const Image& image) const;
  double compare(const Representation& test, const Representation& candidate) const;

  SimilarityMethod method() const noexcept { return method_; }
  std::string id() const;

 private:
  SimilarityMethod method_;
  std::shared_ptr<const FeatureExtractor> extractor_;
  double weight_;
};

}  // namespace attrib

#endif  // ATTRIB_SIMILARITY_HPP_
