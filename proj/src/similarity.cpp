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

#include "attrib/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "attrib/error.hpp"
#include "attrib/spectral.hpp"

namespace attrib {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of vectors with dims " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
  return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::vector<double> SsimKernel() {
  std::vector<double> k(kSsimWindow);
  double sum = 0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    k[i] = std::exp(-(d * d) / (2 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable 'valid' filtering: output is (w-10) x (h-10).
std::vector<double> FilterValid(const std::vector<double>& src, int w, int h,
                                const std::vector<double>& k) {
  const int ow = w - kSsimWindow + 1;
  const int oh = h - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * src[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  const Image ga = to_grayscale(a);
  const Image gb = to_grayscale(b);
  if (ga.width() != gb.width() || ga.height() != gb.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "SSIM needs equally sized images");
  }
  if (std::min(ga.width(), ga.height()) < static_cast<std::uint32_t>(kSsimWindow)) {
    throw Error(ErrorCode::kTooSmall, "SSIM needs both sides >= 11");
  }
  const int w = static_cast<int>(ga.width());
  const int h = static_cast<int>(ga.height());
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ga.data()[i];
    y[i] = gb.data()[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto k = SsimKernel();
  const auto mu_x = FilterValid(x, w, h, k);
  const auto mu_y = FilterValid(y, w, h, k);
  const auto e_xx = FilterValid(xx, w, h, k);
  const auto e_yy = FilterValid(yy, w, h, k);
  const auto e_xy = FilterValid(xy, w, h, k);

  constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
  constexpr double kC2 = (0.03 * 255) * (0.03 * 255);
  double total = 0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    total += ((2 * mx * my + kC1) * (2 * cov + kC2)) /
             ((mx * mx + my * my + kC1) * (vx + vy + kC2));
  }
  return total / static_cast<double>(mu_x.size());
}

double combined_score(const Image& test, const Image& candidate,
                      const FeatureExtractor& extractor, double weight) {
  const Image t = resize_to(test, kAnalysisSize, kAnalysisSize);
  const Image c = resize_to(candidate, kAnalysisSize, kAnalysisSize);
  const double cos = cosine_similarity(extractor.extract(t), extractor.extract(c));
  return weight * cos + (1 - weight) * ssim(t, c);
}

SimScoreSet score_pool(const FeatureVector& test_feature,
                       std::span<const FeatureVector> pool_features,
                       const std::string& model_id) {
  if (pool_features.empty()) {
    throw Error(ErrorCode::kEmptyPool, "empty candidate pool for '" + model_id + "'");
  }
  SimScoreSet set;
  set.model_id = model_id;
  set.scores.reserve(pool_features.size());
  for (const auto& f : pool_features) set.scores.push_back(cosine_similarity(test_feature, f));
  return set;
}

SimilarityMethod ParseSimilarityMethod(const std::string& name) {
  if (name == "spectral") return SimilarityMethod::kSpectral;
  if (name == "embed") return SimilarityMethod::kEmbed;
  if (name == "ssim") return SimilarityMethod::kSsim;
  if (name == "combined") return SimilarityMethod::kCombined;
  throw Error(ErrorCode::kInvalidParam, "unknown extractor '" + name + "'");
}

std::string ToString(SimilarityMethod method) {
  switch (method) {
    case SimilarityMethod::kSpectral: return "spectral";
    case SimilarityMethod::kEmbed: return "embed";
    case SimilarityMethod::kSsim: return "ssim";
    case SimilarityMethod::kCombined: return "combined";
  }
  return "?";
}

Comparator::Comparator(SimilarityMethod method,
                       std::shared_ptr<const FeatureExtractor> extractor,
                       double combined_weight)
    : method_(method), extractor_(std::move(extractor)), weight_(combined_weight) {
  if (method_ != SimilarityMethod::kSsim && !extractor_) {
    throw Error(ErrorCode::kInvalidParam, ToString(method_) + " needs a feature extractor");
  }
  if (!(weight_ >= 0 && weight_ <= 1)) {
    throw Error(ErrorCode::kInvalidParam, "combined weight must be in [0,1]");
  }
}

std::string Comparator::id() const {
  return method_ == SimilarityMethod::kSsim ? "ssim" : ToString(method_) + ":" + extractor_->id();
}

Representation Comparator::represent(const Image& image) const {
  Representation rep;
  switch (method_) {
    case SimilarityMethod::kSpectral:
    case SimilarityMethod::kEmbed:
      rep.feature = extractor_->extract(image);
      break;
    case SimilarityMethod::kSsim:
      rep.analysis_gray = to_grayscale(resize_to(image, kAnalysisSize, kAnalysisSize));
      break;
    case SimilarityMethod::kCombined: {
      Image analysis = resize_to(image, kAnalysisSize, kAnalysisSize);
      rep.feature = extractor_->extract(analysis);
      rep.analysis_gray = to_grayscale(analysis);
      break;
    }
  }
  return rep;
}

double Comparator::compare(const Representation& test, const Representation& candidate) const {
  switch (method_) {
    case SimilarityMethod::kSpectral:
    case SimilarityMethod::kEmbed:
      return cosine_similarity(*test.feature, *candidate.feature);
    case SimilarityMethod::kSsim:
      return ssim(*test.analysis_gray, *candidate.analysis_gray);
    case SimilarityMethod::kCombined:
      return weight_ * cosine_similarity(*test.feature, *candidate.feature) +
             (1 - weight_) * ssim(*test.analysis_gray, *candidate.analysis_gray);
  }
  return 0;
}

}  // namespace attrib
