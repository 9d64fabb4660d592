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

#ifndef ATTRIB_SPECTRAL_HPP_
#define ATTRIB_SPECTRAL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "attrib/feature.hpp"
#include "attrib/image.hpp"

namespace attrib {

// Shared grid for spectra that get averaged or compared across models.
inline constexpr std::uint32_t kAnalysisSize = 256;

struct Spectrum2D {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;  // row-major magnitudes
  bool centered = false;       // DC at (width/2, height/2)

  double at(std::uint32_t x, std::uint32_t y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

// Radially averaged power spectrum: bins[r] is the mean of |F|^2 over the
// annulus whose rounded distance from DC equals r, for r in [0, R].
struct RapsProfile {
  std::vector<double> bins;
  std::vector<std::size_t> counts;

  std::size_t max_radius() const noexcept { return bins.empty() ? 0 : bins.size() - 1; }
};

// |DFT| of the grayscale image, quadrant-shifted so DC sits at the center.
Spectrum2D magnitude_spectrum(const Image& image);

// Element-wise mean of the magnitude spectra after resizing every image to
// analysis_size x analysis_size. Throws EmptyInput.
Spectrum2D average_spectrum(std::span<const Image> images,
                            std::uint32_t analysis_size = kAnalysisSize);

// Throws NotCentered for an unshifted spectrum.
RapsProfile raps(const Spectrum2D& spectrum);

// log1p(RAPS) at the analysis size followed by three 16-bin color
// histograms, L2-normalized. Dimension kAnalysisSize/2 + 1 + 48.
FeatureVector spectral_features(const Image& image);
inline constexpr std::size_t kSpectralFeatureDim = kAnalysisSize / 2 + 1 + 48;

class SpectralExtractor final : public FeatureExtractor {
 public:
  FeatureVector extract(const Image& image) const override {
    return spectral_features(image);
  }
  std::string id() const override { return "spectral"; }
};

// Log-scaled, min-max normalized 8-bit rendering of a spectrum.
Image spectrum_heatmap(const Spectrum2D& spectrum);

}  // namespace attrib

#endif  // ATTRIB_SPECTRAL_HPP_
