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

#include "attrib/image.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <fstream>
#include <iterator>
#include <sstream>

#include "attrib/error.hpp"
#include "attrib/hashing.hpp"

namespace attrib {

Image::Image(std::uint32_t width, std::uint32_t height, std::uint32_t channels)
    : Image(width, height, channels,
            std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height *
                                      channels)) {}

Image::Image(std::uint32_t width, std::uint32_t height, std::uint32_t channels,
             std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidParam, "image dimensions must be >= 1");
  }
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::kInvalidParam, "channels must be 1 or 3");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorCode::kInvalidParam, "data length != width*height*channels");
  }
}

// ---------------------------------------------------------------- attacks

AttackConfig AttackConfig::Parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidParam, "attack must look like op:param, got '" + text + "'");
  }
  const std::string op = text.substr(0, colon);
  AttackConfig cfg;
  if (op == "blur") {
    cfg.kind = AttackKind::kGaussianBlur;
  } else if (op == "jpeg") {
    cfg.kind = AttackKind::kJpegCompression;
  } else if (op == "resize") {
    cfg.kind = AttackKind::kResize;
  } else {
    throw Error(ErrorCode::kInvalidParam, "unknown attack '" + op + "'");
  }
  try {
    std::size_t used = 0;
    cfg.param = std::stod(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidParam, "bad attack parameter in '" + text + "'");
  }
  cfg.Validate();
  return cfg;
}

std::string AttackConfig::ToString() const {
  std::ostringstream os;
  switch (kind) {
    case AttackKind::kGaussianBlur: os << "blur:"; break;
    case AttackKind::kJpegCompression: os << "jpeg:"; break;
    case AttackKind::kResize: os << "resize:"; break;
  }
  os << param;
  return os.str();
}

void AttackConfig::Validate() const {
  switch (kind) {
    case AttackKind::kGaussianBlur:
      if (!(param > 0)) throw Error(ErrorCode::kInvalidParam, "blur sigma must be > 0");
      break;
    case AttackKind::kJpegCompression:
      if (param != std::floor(param) || param < 1 || param > 100) {
        throw Error(ErrorCode::kInvalidParam, "JPEG quality must be an integer in [1,100]");
      }
      break;
    case AttackKind::kResize:
      if (!(param > 0) || param > 1) {
        throw Error(ErrorCode::kInvalidParam, "resize scale must be in (0,1]");
      }
      break;
  }
}

Image apply_attack(const Image& image, const AttackConfig& attack) {
  attack.Validate();
  switch (attack.kind) {
    case AttackKind::kGaussianBlur: return gaussian_blur(image, attack.param);
    case AttackKind::kJpegCompression:
      return jpeg_roundtrip(image, static_cast<int>(attack.param));
    case AttackKind::kResize: return resize(image, attack.param);
  }
  return image;
}

// ---------------------------------------------------------------- codecs

namespace {

// Round half away from zero for values clamped into [0, 255].
inline std::uint8_t ClampRound(double v) {
  return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 255.0) + 0.5));
}

std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed for '" + path.string() + "'");
  return bytes;
}

bool IsPng(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return b.size() >= 8 && std::equal(kSig, kSig + 8, b.begin());
}

bool IsJpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

Image DecodePng(std::span<const std::uint8_t> bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::kDecode, "PNG header: " + msg);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, data.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw Error(ErrorCode::kDecode, "PNG body: " + msg);
  }
  return Image(png.width, png.height, 3, std::move(data));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void JpegErrorExit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void JpegSilence(j_common_ptr, int) {}

// Only trivially destructible locals may live between setjmp and longjmp.
Image DecodeJpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = JpegErrorExit;
  err.base.emit_message = JpegSilence;
  std::vector<std::uint8_t> data;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::kDecode, std::string("JPEG: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = cinfo.output_width;
  height = cinfo.output_height;
  data.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = data.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return Image(width, height, 3, std::move(data));
}

std::vector<std::uint8_t> EncodeJpeg(const Image& image, int quality) {
  jpeg_compress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = JpegErrorExit;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw Error(ErrorCode::kDecode, std::string("JPEG encode: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = image.width();
  cinfo.image_height = image.height();
  cinfo.input_components = static_cast<int>(image.channels());
  cinfo.in_color_space = image.channels() == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channels();
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<std::uint8_t*>(image.data().data()) +
                   static_cast<std::size_t>(cinfo.next_scanline) * stride;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  std::free(buffer);
  return out;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (IsPng(bytes)) return DecodePng(bytes);
  if (IsJpeg(bytes)) return DecodeJpeg(bytes);
  throw Error(ErrorCode::kDecode, "unsupported or corrupt image data");
}

Image load_image(const std::filesystem::path& path) {
  return decode_image(ReadFile(path));
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = image.width();
  png.height = image.height();
  png.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png, size, 0, image.data().data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG encode: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.data().data(), 0,
                                 nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG encode: ") + png.message);
  }
  out.resize(size);
  return out;
}

void save_image(const Image& image, const std::filesystem::path& path) {
  if (path.empty()) throw Error(ErrorCode::kIo, "empty output path");
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------- transforms

Image to_grayscale(const Image& image) {
  if (image.channels() == 1) return image;
  Image out(image.width(), image.height(), 1);
  const auto src = image.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double luma = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    dst[i] = ClampRound(luma);
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0)) throw Error(ErrorCode::kInvalidParam, "sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int d = -radius; d <= radius; ++d) {
    k[d + radius] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[d + radius];
  }
  for (auto& w : k) w /= sum;
  return k;
}

Image gaussian_blur(const Image& image, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = static_cast<int>(image.width());
  const int h = static_cast<int>(image.height());
  const int ch = static_cast<int>(image.channels());
  const auto src = image.data();

  std::vector<double> tmp(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0;
        for (int d = -radius; d <= radius; ++d) {
          const int xx = std::clamp(x + d, 0, w - 1);
          acc += kernel[d + radius] * src[(static_cast<std::size_t>(y) * w + xx) * ch + c];
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * ch + c] = acc;
      }
    }
  }
  Image out(image.width(), image.height(), image.channels());
  auto dst = out.data();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0;
        for (int d = -radius; d <= radius; ++d) {
          const int yy = std::clamp(y + d, 0, h - 1);
          acc += kernel[d + radius] * tmp[(static_cast<std::size_t>(yy) * w + x) * ch + c];
        }
        dst[(static_cast<std::size_t>(y) * w + x) * ch + c] = ClampRound(acc);
      }
    }
  }
  return out;
}

Image jpeg_roundtrip(const Image& image, int quality) {
  if (quality < 1 || quality > 100) {
    throw Error(ErrorCode::kInvalidParam, "JPEG quality must be in [1,100]");
  }
  Image decoded = DecodeJpeg(EncodeJpeg(image, quality));
  return image.channels() == 1 ? to_grayscale(decoded) : decoded;
}

Image resize_to(const Image& image, std::uint32_t width, std::uint32_t height) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidParam, "target dimensions must be >= 1");
  }
  if (width == image.width() && height == image.height()) return image;
  const int sw = static_cast<int>(image.width());
  const int sh = static_cast<int>(image.height());
  const int ch = static_cast<int>(image.channels());
  const double fx = static_cast<double>(sw) / width;
  const double fy = static_cast<double>(sh) / height;
  const auto src = image.data();
  Image out(width, height, image.channels());
  auto dst = out.data();
  for (std::uint32_t y = 0; y < height; ++y) {
    const double sy = std::clamp((y + 0.5) * fy - 0.5, 0.0, sh - 1.0);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, sh - 1);
    const double wy = sy - y0;
    for (std::uint32_t x = 0; x < width; ++x) {
      const double sx = std::clamp((x + 0.5) * fx - 0.5, 0.0, sw - 1.0);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, sw - 1);
      const double wx = sx - x0;
      for (int c = 0; c < ch; ++c) {
        auto px = [&](int xx, int yy) {
          return static_cast<double>(src[(static_cast<std::size_t>(yy) * sw + xx) * ch + c]);
        };
        const double top = px(x0, y0) * (1 - wx) + px(x1, y0) * wx;
        const double bottom = px(x0, y1) * (1 - wx) + px(x1, y1) * wx;
        const double v = top * (1 - wy) + bottom * wy;
        dst[(static_cast<std::size_t>(y) * width + x) * ch + c] = ClampRound(v);
      }
    }
  }
  return out;
}

Image resize(const Image& image, double scale) {
  if (!(scale > 0) || scale > 1) {
    throw Error(ErrorCode::kInvalidParam, "scale must be in (0,1]");
  }
  const long w = std::lround(image.width() * scale);
  const long h = std::lround(image.height() * scale);
  if (w < 1 || h < 1) throw Error(ErrorCode::kInvalidParam, "resized image would be empty");
  return resize_to(image, static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h));
}

std::string content_hash(const Image& image) {
  std::vector<std::uint8_t> buf;
  buf.reserve(12 + image.data().size());
  for (std::uint32_t v : {image.width(), image.height(), image.channels()}) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  buf.insert(buf.end(), image.data().begin(), image.data().end());
  return sha256_hex(buf);
}

}  // namespace attrib
