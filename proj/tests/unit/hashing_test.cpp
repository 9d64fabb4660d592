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

#include "attrib/hashing.hpp"

#include <array>
#include <set>

#include <gtest/gtest.h>

#include "attrib/error.hpp"

namespace attrib {
namespace {

// Reference xoshiro256** step on an explicit state.
std::uint64_t RefXoshiro(std::array<std::uint64_t, 4>& s) {
  auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
  const std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  return result;
}

TEST(HashingTest, Fnv1aVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(HashingTest, SplitMixVectors) {
  SplitMix64 sm(0);
  EXPECT_EQ(sm.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(sm.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(sm.next(), 0x06c45d188009454fULL);
}

TEST(HashingTest, ReferenceXoshiroSanity) {
  // Published first outputs for state {1,2,3,4}.
  std::array<std::uint64_t, 4> s{1, 2, 3, 4};
  EXPECT_EQ(RefXoshiro(s), 11520u);
  EXPECT_EQ(RefXoshiro(s), 0u);
  EXPECT_EQ(RefXoshiro(s), 1509978240u);
  EXPECT_EQ(RefXoshiro(s), 1215971899390074240u);
}

TEST(HashingTest, XoshiroSeededBySplitMix) {
  for (std::uint64_t seed : {0ULL, 2023ULL, 0xffffffffffffffffULL}) {
    SplitMix64 sm(seed);
    std::array<std::uint64_t, 4> s{sm.next(), sm.next(), sm.next(), sm.next()};
    Xoshiro256 rng(seed);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(rng.next(), RefXoshiro(s));
  }
}

TEST(HashingTest, UniformAndNormalMoments) {
  Xoshiro256 rng(42);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
  }
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    ASSERT_LE(std::abs(z), 2 * 1.7320508075688772);
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(HashingTest, DeriveSeedSeparatesInputs) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed : {1ULL, 2ULL}) {
    for (const char* model : {"m1", "m2", "m10"}) {
      for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(seed, model, i));
    }
  }
  EXPECT_EQ(seen.size(), 300u);
  EXPECT_EQ(derive_seed(2023, "m1", 7), derive_seed(2023, "m1", 7));
}

TEST(HashingTest, Sha256Vectors) {
  EXPECT_EQ(sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(std::string_view("")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(HashingTest, Base64) {
  const std::string text = "foobar";
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  const char* expect[] = {"", "Zg==", "Zm8=", "Zm9v", "Zm9vYg==", "Zm9vYmE=", "Zm9vYmFy"};
  for (std::size_t n = 0; n <= bytes.size(); ++n) {
    const std::span<const std::uint8_t> prefix(bytes.data(), n);
    EXPECT_EQ(base64_encode(prefix), expect[n]);
    EXPECT_EQ(base64_decode(expect[n]), std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + n));
  }
  for (const char* bad : {"Zm9", "Zm9v!A==", "=Zm9"}) {
    try {
      base64_decode(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kProtocol);
    }
  }
}

}  // namespace
}  // namespace attrib
