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

#ifndef ATTRIB_IMAGE_HPP_
#define ATTRIB_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace attrib {

// Owned 8-bit pixel buffer, row-major, interleaved channels (1 = gray, 3 = RGB).
class Image {
 public:
  Image() = default;
  Image(std::uint32_t width, std::uint32_t height, std::uint32_t channels);
  Image(std::uint32_t width, std::uint32_t height, std::uint32_t channels,
        std::vector<std::uint8_t> data);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::uint32_t channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t at(std::uint32_t x, std::uint32_t y, std::uint32_t c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(std::uint32_t x, std::uint32_t y, std::uint32_t c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  bool operator==(const Image&) const = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::uint32_t channels_ = 0;
  std::vector<std::uint8_t> data_;
};

enum class AttackKind { kGaussianBlur, kJpegCompression, kResize };

struct AttackConfig {
  AttackKind kind = AttackKind::kResize;
  double param = 1.0;  // sigma, JPEG quality or scale

  // Parses "blur:1.0", "jpeg:95", "resize:0.5". Throws InvalidParam.
  static AttackConfig Parse(const std::string& text);
  std::string ToString() const;
  void Validate() const;
};

// Codecs. Decoding accepts PNG and baseline JPEG; gray sources are expanded
// to RGB. Encoding always produces 8-bit PNG.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& image);

// BT.601 luma, rounded half away from zero. Gray input is returned as is.
Image to_grayscale(const Image& image);

// Separable Gaussian, radius ceil(3 sigma), clamp-to-edge borders.
Image gaussian_blur(const Image& image, double sigma);
std::vector<double> gaussian_kernel(double sigma);

Image jpeg_roundtrip(const Image& image, int quality);

// Bilinear downscale to (round(w*scale), round(h*scale)), scale in (0, 1].
Image resize(const Image& image, double scale);
// Bilinear resampling to an explicit size (up or down), half-pixel centers.
Image resize_to(const Image& image, std::uint32_t width, std::uint32_t height);

Image apply_attack(const Image& image, const AttackConfig& attack);

// SHA-256 over dimensions and samples, lowercase hex.
std::string content_hash(const Image& image);

}  // namespace attrib

#endif  // ATTRIB_IMAGE_HPP_
