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

#include <cmath>
#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "attrib/error.hpp"
#include "test_util.hpp"

namespace attrib {
namespace {

using testing::ConstantImage;
using testing::RandomImage;
using testing::TempDir;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no attrib::Error thrown";
  return ErrorCode::kUsage;
}

double Mean(const Image& img) {
  const auto d = img.data();
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

TEST(ImageTest, ConstructorRejectsBadShapes) {
  EXPECT_EQ(CodeOf([] { Image(0, 4, 3); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([] { Image(4, 4, 2); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([] { Image(2, 2, 3, std::vector<std::uint8_t>(5)); }), ErrorCode::kInvalidParam);
}

TEST(ImageTest, SinglePixelPngDecodesToBlack) {
  const Image px(1, 1, 3, {0, 0, 0});
  const Image back = decode_image(encode_png(px));
  EXPECT_EQ(back.width(), 1u);
  EXPECT_EQ(back.height(), 1u);
  EXPECT_EQ(back.channels(), 3u);
  EXPECT_EQ(std::vector<std::uint8_t>(back.data().begin(), back.data().end()),
            (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(ImageTest, SaveLoadRoundTripIsLossless) {
  TempDir dir;
  for (std::uint32_t seed = 0; seed < 5; ++seed) {
    const Image img = RandomImage(17 + seed, 9 + 2 * seed, 3, seed);
    save_image(img, dir / "x.png");
    EXPECT_EQ(load_image(dir / "x.png"), img);
  }
}

TEST(ImageTest, GrayPngExpandsToRgb) {
  TempDir dir;
  const Image gray = RandomImage(8, 8, 1, 3);
  save_image(gray, dir / "g.png");
  const Image rgb = load_image(dir / "g.png");
  ASSERT_EQ(rgb.channels(), 3u);
  for (std::uint32_t y = 0; y < 8; ++y) {
    for (std::uint32_t x = 0; x < 8; ++x) {
      for (std::uint32_t c = 0; c < 3; ++c) EXPECT_EQ(rgb.at(x, y, c), gray.at(x, y));
    }
  }
}

TEST(ImageTest, TruncatedFileIsDecodeError) {
  TempDir dir;
  const auto bytes = encode_png(RandomImage(32, 32, 3, 1));
  std::ofstream(dir / "t.png", std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size() / 2));
  EXPECT_EQ(CodeOf([&] { load_image(dir / "t.png"); }), ErrorCode::kDecode);
  std::ofstream(dir / "junk.png") << "not an image at all";
  EXPECT_EQ(CodeOf([&] { load_image(dir / "junk.png"); }), ErrorCode::kDecode);
}

TEST(ImageTest, IoErrors) {
  TempDir dir;
  const Image img = RandomImage(4, 4, 3, 0);
  EXPECT_EQ(CodeOf([&] { load_image(dir / "missing.png"); }), ErrorCode::kIo);
  EXPECT_EQ(CodeOf([&] { save_image(img, ""); }), ErrorCode::kIo);
  EXPECT_EQ(CodeOf([&] { save_image(img, dir / "no" / "such" / "dir.png"); }), ErrorCode::kIo);
}

TEST(ImageTest, GrayscaleLuma) {
  EXPECT_EQ(to_grayscale(Image(1, 1, 3, {255, 255, 255})).at(0, 0), 255);
  EXPECT_EQ(to_grayscale(Image(1, 1, 3, {255, 0, 0})).at(0, 0), 76);
  const Image rgb = RandomImage(16, 16, 3, 11);
  const Image gray = to_grayscale(rgb);
  ASSERT_EQ(gray.channels(), 1u);
  for (std::uint32_t y = 0; y < 16; ++y) {
    for (std::uint32_t x = 0; x < 16; ++x) {
      const double luma =
          0.299 * rgb.at(x, y, 0) + 0.587 * rgb.at(x, y, 1) + 0.114 * rgb.at(x, y, 2);
      EXPECT_EQ(gray.at(x, y), static_cast<int>(std::floor(luma + 0.5)));
    }
  }
  EXPECT_EQ(to_grayscale(gray), gray);
}

TEST(ImageTest, BlurPreservesConstants) {
  for (double sigma : {0.5, 1.0, 2.5}) {
    const Image c = ConstantImage(20, 13, 3, 137);
    EXPECT_EQ(gaussian_blur(c, sigma), c);
  }
  EXPECT_EQ(CodeOf([] { gaussian_blur(ConstantImage(4, 4, 1, 0), 0.0); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([] { gaussian_blur(ConstantImage(4, 4, 1, 0), -1.0); }), ErrorCode::kInvalidParam);
}

TEST(ImageTest, BlurImpulseMatchesSampledGaussian) {
  const double sigma = 1.0;
  const int radius = static_cast<int>(std::ceil(3 * sigma));
  double z = 0;
  for (int d = -radius; d <= radius; ++d) z += std::exp(-d * d / (2 * sigma * sigma));
  auto k = [&](int d) { return std::abs(d) > radius ? 0.0 : std::exp(-d * d / (2 * sigma * sigma)) / z; };

  Image impulse(41, 41, 1);
  impulse.at(20, 20) = 255;
  const Image out = gaussian_blur(impulse, sigma);
  for (int dy = -5; dy <= 5; ++dy) {
    for (int dx = -5; dx <= 5; ++dx) {
      const double expect = 255.0 * k(dx) * k(dy);
      EXPECT_LE(std::abs(out.at(20 + dx, 20 + dy) - expect), 0.5 + 1e-9) << dx << "," << dy;
    }
  }
}

TEST(ImageTest, BlurKeepsMean) {
  for (std::uint32_t seed = 0; seed < 4; ++seed) {
    const Image img = RandomImage(40, 30, 3, seed);
    EXPECT_NEAR(Mean(gaussian_blur(img, 1.0 + seed)), Mean(img), 0.5);
  }
}

TEST(ImageTest, JpegConstantGraySurvives) {
  const Image gray = ConstantImage(64, 64, 3, 128);
  const Image out = jpeg_roundtrip(gray, 95);
  ASSERT_EQ(out.width(), 64u);
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    EXPECT_LE(std::abs(int(out.data()[i]) - 128), 2);
  }
  EXPECT_EQ(CodeOf([&] { jpeg_roundtrip(gray, 0); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([&] { jpeg_roundtrip(gray, 101); }), ErrorCode::kInvalidParam);
}

TEST(ImageTest, JpegPreservesShape) {
  for (std::uint32_t c : {1u, 3u}) {
    const Image img = RandomImage(37, 21, c, c);
    const Image out = jpeg_roundtrip(img, 50);
    EXPECT_EQ(out.width(), 37u);
    EXPECT_EQ(out.height(), 21u);
    EXPECT_EQ(out.channels(), c);
  }
}

TEST(ImageTest, ResizeDimensions) {
  EXPECT_EQ(resize(RandomImage(512, 512, 3, 1), 0.5).width(), 256u);
  const Image half = resize(RandomImage(256, 256, 3, 2), 0.5);
  EXPECT_EQ(half.width(), 128u);
  EXPECT_EQ(half.height(), 128u);
  const Image img = RandomImage(33, 19, 3, 3);
  EXPECT_EQ(resize(resize(img, 1.0), 1.0), img);
  EXPECT_EQ(CodeOf([&] { resize(img, 0.0); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([&] { resize(img, 1.5); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([&] { resize(img, 0.001); }), ErrorCode::kInvalidParam);
}

TEST(ImageTest, HalfScaleBilinearAveragesPairs) {
  // With half-pixel centers a 2x downscale samples exactly between four pixels.
  const Image img = RandomImage(8, 6, 1, 9);
  const Image half = resize(img, 0.5);
  for (std::uint32_t y = 0; y < 3; ++y) {
    for (std::uint32_t x = 0; x < 4; ++x) {
      const double avg = (img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y) +
                          img.at(2 * x, 2 * y + 1) + img.at(2 * x + 1, 2 * y + 1)) / 4.0;
      EXPECT_LE(std::abs(half.at(x, y) - avg), 0.5 + 1e-9);
    }
  }
}

TEST(ImageTest, AttackConfigParse) {
  const auto blur = AttackConfig::Parse("blur:1.0");
  EXPECT_EQ(blur.kind, AttackKind::kGaussianBlur);
  EXPECT_DOUBLE_EQ(blur.param, 1.0);
  EXPECT_EQ(AttackConfig::Parse("jpeg:95").kind, AttackKind::kJpegCompression);
  EXPECT_EQ(AttackConfig::Parse("resize:0.5").kind, AttackKind::kResize);
  EXPECT_EQ(AttackConfig::Parse(blur.ToString()).param, 1.0);
  EXPECT_EQ(CodeOf([] { AttackConfig::Parse("jpeg:95.5"); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([] { AttackConfig::Parse("sharpen:2"); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([] { AttackConfig::Parse("blur"); }), ErrorCode::kInvalidParam);
  const Image img = RandomImage(16, 16, 3, 4);
  EXPECT_EQ(apply_attack(img, AttackConfig::Parse("resize:1")), img);
}

TEST(ImageTest, ContentHashDistinguishesShape) {
  const Image a(2, 1, 1, {1, 2});
  const Image b(1, 2, 1, {1, 2});
  EXPECT_NE(content_hash(a), content_hash(b));
  EXPECT_EQ(content_hash(a), content_hash(Image(2, 1, 1, {1, 2})));
  EXPECT_EQ(content_hash(a).size(), 64u);
}

}  // namespace
}  // namespace attrib
