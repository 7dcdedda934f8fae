// Copyright 2026 The icldetail Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Counter-based random numbers.
//
// Philox4x32-10 (Salmon, Moraes, Dror, Shaw; SC'11) maps a 128-bit counter and
// a 64-bit key to 128 random bits with no hidden state, so any element of a
// random matrix can be regenerated from (seed, index) alone. Output is
// identical on every platform; the Gaussian transform below uses std::log,
// std::sqrt, std::cos and std::sin, which agree bit-for-bit wherever the C
// library rounds them identically (true for glibc on x86-64 and aarch64).

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace icldetail {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

inline PhiloxKey philox_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Uniform in [0, 1) with 53 random bits.
inline double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Box-Muller on two 64-bit words; the first uniform is shifted into (0, 1]
// so the logarithm is always finite.
inline std::pair<double, double> gaussian_pair(std::uint64_t a, std::uint64_t b) {
  const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
  const double u2 = unit_uniform(b);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

// Standard normal number `index` of the stream identified by (seed, stream).
// Two normals come out of each Philox block.
inline double philox_gaussian_at(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index) {
  const std::uint64_t block = index / 2;
  const PhiloxCounter out = philox4x32_10(
      {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
       static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
      philox_key(seed));
  const std::uint64_t a = (std::uint64_t{out[1]} << 32) | out[0];
  const std::uint64_t b = (std::uint64_t{out[3]} << 32) | out[2];
  const auto [g0, g1] = gaussian_pair(a, b);
  return (index % 2 == 0) ? g0 : g1;
}

// Sequential view over one Philox stream. Cheap to copy; two streams with the
// same (seed, stream) produce the same sequence.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream)
      : key_(philox_key(seed)), stream_(stream) {}

  std::uint64_t next_u64() {
    if (lane_ == 2) {
      refill();
    }
    return buffer_[lane_++];
  }

  double next_uniform() { return unit_uniform(next_u64()); }

  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const std::uint64_t a = next_u64();
    const std::uint64_t b = next_u64();
    const auto [g0, g1] = gaussian_pair(a, b);
    spare_ = g1;
    has_spare_ = true;
    return g0;
  }

  // Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t next_index(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) {
        return x % bound;
      }
    }
  }

 private:
  void refill() {
    const PhiloxCounter out = philox4x32_10(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        key_);
    ++block_;
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    lane_ = 0;
  }

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace icldetail
