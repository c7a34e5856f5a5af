#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "supplyscan/keyed_rng.hpp"

namespace supplyscan::rng {
namespace {

TEST(KeyedRng, SameKeySameBits) {
  const Key a = Key(42).with("read").with(7).with(3);
  const Key b = Key(42).with("read").with(7).with(3);
  EXPECT_EQ(a.bits(), b.bits());
}

TEST(KeyedRng, DistinctKeysDiverge) {
  std::set<std::uint64_t> seen;
  const Key base = Key(1).with("read");
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(base.with(i).bits());
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_NE(Key(1).with("read").bits(), Key(1).with("fpn").bits());
  EXPECT_NE(Key(1).with(2).with(3).bits(), Key(1).with(3).with(2).bits());
}

TEST(KeyedRng, UniformRanges) {
  EXPECT_GT(uniform_open0(0), 0.0);
  EXPECT_LE(uniform_open0(~std::uint64_t{0}), 1.0);
  EXPECT_EQ(uniform(0), 0.0);
  EXPECT_LT(uniform(~std::uint64_t{0}), 1.0);
}

TEST(KeyedRng, NormalMomentsAreStandard) {
  const Key base = Key(2024).with("moments");
  constexpr int kPairs = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < kPairs; ++i) {
    const auto p = normal_pair(base.with(static_cast<std::uint64_t>(i)));
    sum += p.first + p.second;
    sum_sq += p.first * p.first + p.second * p.second;
  }
  const double n = 2.0 * kPairs;
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  // 5 sigma bounds for n = 2e5 draws.
  EXPECT_NEAR(mean, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(var, 1.0, 5.0 * std::sqrt(2.0 / n));
}

}  // namespace
}  // namespace supplyscan::rng
