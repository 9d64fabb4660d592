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

#ifndef ATTRIB_HASHING_HPP_
#define ATTRIB_HASHING_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attrib {

// Stable, platform-independent hashing and random streams. These are part of
// the synthetic-model contract (docs/synth_contract.md) and must not change.

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64_mix(std::uint64_t z);

// Per-image seed for index `index` of model `model_id` under run seed `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view model_id,
                          std::uint64_t index);

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

// xoshiro256** seeded from splitmix64.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);
  std::uint64_t next();
  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  // Irwin-Hall approximation: four 16-bit uniforms taken from a single
  // draw, centered, unit variance.
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws Error(kProtocol) on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace attrib

#endif  // ATTRIB_HASHING_HPP_
