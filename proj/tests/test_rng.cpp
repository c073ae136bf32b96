#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "parity_forge/error.hpp"
#include "parity_forge/rng.hpp"

using namespace parity_forge;

TEST(Philox, KnownAnswers) {
  auto a = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(a, (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  auto b = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  EXPECT_EQ(b, (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  auto c = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  EXPECT_EQ(c, (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(KeyedUniform, OpenIntervalAndMoments) {
  DrawKey key{42, Domain::test, 0, 0};
  double sum = 0, sumsq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = keyed_uniform(key, static_cast<std::uint64_t>(i));
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sumsq += u * u;
  }
  double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sumsq / n - mean * mean, 1.0 / 12, 1e-3);
}

TEST(KeyedUniform, PureFunctionOfKey) {
  DrawKey key{7, Domain::transform, 3, 2};
  EXPECT_EQ(keyed_uniform(key, 99), keyed_uniform(key, 99));
  std::set<double> distinct = {keyed_uniform(key, 99), keyed_uniform(key.with_replicate(4), 99),
                               keyed_uniform(key.with_step(3), 99), keyed_uniform(key, 100),
                               keyed_uniform(key, 99, 1),
                               keyed_uniform(DrawKey{8, Domain::transform, 3, 2}, 99),
                               keyed_uniform(DrawKey{7, Domain::simulation, 3, 2}, 99)};
  EXPECT_EQ(distinct.size(), 7u);
}

TEST(KeyedNormal, Moments) {
  DrawKey key{1, Domain::test, 0, 0};
  double sum = 0, sumsq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double z = keyed_normal(key, static_cast<std::uint64_t>(i));
    sum += z;
    sumsq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sumsq / n, 1.0, 0.02);
}

TEST(DeriveSeed, Distinct) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
}

TEST(KeyedDraws, OnlyTwoLanes) {
  DrawKey k{1, Domain::test, 0, 0};
  EXPECT_NE(keyed_uniform(k, 0, 0), keyed_uniform(k, 0, 1));
  EXPECT_THROW(keyed_uniform(k, 0, 2), Error);
}
