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

#include "attrib/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <array>
#include <utility>

#include "attrib/error.hpp"

namespace attrib {

namespace {

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

ComplexBuffer AllocComplex(std::size_t n) {
  return ComplexBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

// FFTW planning is not thread-safe; executing a finished plan on fresh
// arrays is. Plans are created once per size under a lock.
fftw_plan ForwardPlan(std::uint32_t width, std::uint32_t height) {
  static std::mutex mu;
  static std::map<std::pair<std::uint32_t, std::uint32_t>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find({width, height});
  if (it != plans.end()) return it->second;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  auto in = AllocComplex(n);
  auto out = AllocComplex(n);
  fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(height), static_cast<int>(width),
                                    in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  plans.emplace(std::make_pair(width, height), plan);
  return plan;
}

// Rounded distance of every bin from (w/2, h/2), computed once per size.
const std::vector<std::uint32_t>& RadiusTable(std::uint32_t w, std::uint32_t h) {
  static std::mutex mu;
  static std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> tables;
  std::lock_guard<std::mutex> lock(mu);
  auto& table = tables[{w, h}];
  if (table.empty()) {
    table.resize(static_cast<std::size_t>(w) * h);
    const double cx = w / 2;
    const double cy = h / 2;
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        table[static_cast<std::size_t>(y) * w + x] =
            static_cast<std::uint32_t>(std::lround(std::hypot(x - cx, y - cy)));
      }
    }
  }
  return table;
}

// Streaming pairwise summation: partial[k] holds a sum of 2^k spectra.
class PairwiseAccumulator {
 public:
  void Add(std::vector<double> v) {
    std::size_t level = 0;
    while (level < partial_.size() && partial_[level].has_value()) {
      auto& other = *partial_[level];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = other[i] + v[i];
      partial_[level].reset();
      ++level;
    }
    if (level == partial_.size()) partial_.emplace_back();
    partial_[level] = std::move(v);
  }

  std::vector<double> Total() const {
    std::vector<double> total;
    for (const auto& p : partial_) {
      if (!p) continue;
      if (total.empty()) {
        total = *p;
      } else {
        for (std::size_t i = 0; i < total.size(); ++i) total[i] = (*p)[i] + total[i];
      }
    }
    return total;
  }

 private:
  std::vector<std::optional<std::vector<double>>> partial_;
};

}  // namespace

Spectrum2D magnitude_spectrum(const Image& image) {
  const Image gray = to_grayscale(image);
  const std::uint32_t w = gray.width();
  const std::uint32_t h = gray.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  auto in = AllocComplex(n);
  auto out = AllocComplex(n);
  const auto px = gray.data();
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = px[i];
    in[i][1] = 0.0;
  }
  fftw_execute_dft(ForwardPlan(w, h), in.get(), out.get());

  Spectrum2D spec;
  spec.width = w;
  spec.height = h;
  spec.centered = true;
  spec.values.resize(n);
  for (std::uint32_t y = 0; y < h; ++y) {
    const std::uint32_t sy = (y + h / 2) % h;
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::uint32_t sx = (x + w / 2) % w;
      const auto& c = out[static_cast<std::size_t>(y) * w + x];
      spec.values[static_cast<std::size_t>(sy) * w + sx] = std::sqrt(c[0] * c[0] + c[1] * c[1]);
    }
  }
  return spec;
}

Spectrum2D average_spectrum(std::span<const Image> images, std::uint32_t analysis_size) {
  if (images.empty()) throw Error(ErrorCode::kEmptyInput, "no images to average");
  PairwiseAccumulator acc;
  for (const auto& img : images) {
    acc.Add(magnitude_spectrum(resize_to(img, analysis_size, analysis_size)).values);
  }
  Spectrum2D mean;
  mean.width = analysis_size;
  mean.height = analysis_size;
  mean.centered = true;
  mean.values = acc.Total();
  const double inv = 1.0 / static_cast<double>(images.size());
  for (auto& v : mean.values) v *= inv;
  return mean;
}

RapsProfile raps(const Spectrum2D& spectrum) {
  if (!spectrum.centered) {
    throw Error(ErrorCode::kNotCentered, "RAPS requires a DC-centered spectrum");
  }
  const std::uint32_t w = spectrum.width;
  const std::uint32_t h = spectrum.height;
  const std::size_t max_r = std::min(w, h) / 2;
  RapsProfile profile;
  profile.bins.assign(max_r + 1, 0.0);
  profile.counts.assign(max_r + 1, 0);
  const auto& radius = RadiusTable(w, h);
  for (std::size_t i = 0; i < radius.size(); ++i) {
    const std::size_t r = radius[i];
    if (r > max_r) continue;
    const double v = spectrum.values[i];
    profile.bins[r] += v * v;
    ++profile.counts[r];
  }
  for (std::size_t r = 0; r <= max_r; ++r) {
    if (profile.counts[r] > 0) profile.bins[r] /= static_cast<double>(profile.counts[r]);
  }
  return profile;
}

FeatureVector spectral_features(const Image& image) {
  const Image analysis = resize_to(image, kAnalysisSize, kAnalysisSize);
  const RapsProfile profile = raps(magnitude_spectrum(analysis));

  FeatureVector fv;
  fv.extractor_id = "spectral";
  fv.values.reserve(kSpectralFeatureDim);
  for (double p : profile.bins) fv.values.push_back(std::log1p(p));

  constexpr int kBins = 16;
  const auto px = analysis.data();
  const std::uint32_t ch = analysis.channels();
  const double n = static_cast<double>(analysis.width()) * analysis.height();
  for (std::uint32_t c = 0; c < 3; ++c) {
    std::array<double, kBins> hist{};
    const std::uint32_t src_c = ch == 3 ? c : 0;
    for (std::size_t i = src_c; i < px.size(); i += ch) hist[px[i] / (256 / kBins)] += 1.0;
    for (double v : hist) fv.values.push_back(v / n);
  }

  double norm2 = 0;
  for (double v : fv.values) norm2 += v * v;
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& v : fv.values) v *= inv;
  return fv;
}

Image spectrum_heatmap(const Spectrum2D& spectrum) {
  std::vector<double> logv(spectrum.values.size());
  std::transform(spectrum.values.begin(), spectrum.values.end(), logv.begin(),
                 [](double v) { return std::log1p(v); });
  const auto [lo, hi] = std::minmax_element(logv.begin(), logv.end());
  const double range = *hi - *lo;
  std::vector<std::uint8_t> px(logv.size());
  for (std::size_t i = 0; i < logv.size(); ++i) {
    const double t = range > 0 ? (logv[i] - *lo) / range : 0.0;
    px[i] = static_cast<std::uint8_t>(std::lround(255.0 * t));
  }
  return Image(spectrum.width, spectrum.height, 1, std::move(px));
}

}  // namespace attrib
