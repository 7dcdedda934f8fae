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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "icldetail/philox.hpp"

namespace {

using icldetail::PhiloxCounter;
using icldetail::PhiloxKey;

// Known-answer vectors published with Random123.
TEST(Philox, KnownAnswerZero) {
  const PhiloxCounter out = icldetail::philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const PhiloxCounter out = icldetail::philox4x32_10(
      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const PhiloxCounter out = icldetail::philox4x32_10(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09u, 0x94fdcceb, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
  icldetail::PhiloxStream a(5, 0);
  icldetail::PhiloxStream b(5, 0);
  icldetail::PhiloxStream c(5, 1);
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
}

TEST(Philox, UniformInHalfOpenUnit) {
  EXPECT_EQ(icldetail::unit_uniform(0), 0.0);
  EXPECT_LT(icldetail::unit_uniform(~0ULL), 1.0);
}

TEST(Philox, GaussianMoments) {
  icldetail::PhiloxStream s(1, 2);
  double sum = 0.0;
  double sq = 0.0;
  constexpr int kN = 200000;
  for (int i = 0; i < kN; ++i) {
    const double g = s.next_gaussian();
    ASSERT_TRUE(std::isfinite(g));
    sum += g;
    sq += g * g;
  }
  EXPECT_NEAR(sum / kN, 0.0, 0.01);
  EXPECT_NEAR(sq / kN, 1.0, 0.015);
}

TEST(Philox, IndexCoversRange) {
  icldetail::PhiloxStream s(0, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 500; ++i) {
    const auto v = s.next_index(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Philox, GaussianAtMatchesStream) {
  icldetail::PhiloxStream s(9, 4);
  for (std::uint64_t i = 0; i < 6; ++i) {
    EXPECT_EQ(icldetail::philox_gaussian_at(9, 4, i), s.next_gaussian());
  }
}

}  // namespace
