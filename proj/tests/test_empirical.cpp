#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "parity_forge/empirical.hpp"
#include "parity_forge/error.hpp"
#include "parity_forge/rng.hpp"

using namespace parity_forge;

namespace {
const std::vector<double> kThree = {3, 1, 2};
}

TEST(Ecdf, Eval) {
  Ecdf e(kThree);
  EXPECT_DOUBLE_EQ(e.eval(2), 2.0 / 3);
  EXPECT_EQ(e.eval(0.5), 0.0);
  EXPECT_EQ(e.eval(3), 1.0);
}

TEST(Ecdf, Left) {
  Ecdf e(kThree);
  EXPECT_DOUBLE_EQ(e.left(2), 1.0 / 3);
  EXPECT_EQ(e.left(1), 0.0);
  EXPECT_EQ(e.left(10), 1.0);
}

TEST(Ecdf, Quantile) {
  Ecdf e(kThree);
  EXPECT_EQ(e.quantile(0.5), 2.0);
  EXPECT_EQ(e.quantile(1.0), 3.0);
  EXPECT_EQ(e.quantile(0.0), 1.0);
  EXPECT_THROW(e.quantile(1.5), Error);
  EXPECT_THROW(e.quantile(-0.1), Error);
}

TEST(Ecdf, TiesCollapse) {
  std::vector<double> v = {2, 2, 5, 2, 7};
  Ecdf e(v);
  ASSERT_EQ(e.support().size(), 3u);
  EXPECT_DOUBLE_EQ(e.mass(2), 0.6);
  EXPECT_EQ(e.cum_probs().back(), 1.0);
}

TEST(Ecdf, EmptyAndNan) {
  std::vector<double> empty;
  EXPECT_THROW({ Ecdf e(empty); }, Error);
  std::vector<double> nan = {1.0, std::nan("")};
  EXPECT_THROW({ Ecdf e(nan); }, Error);
}

TEST(EcdfProperty, QuantileOfEvalAtSupportIsIdentity) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::poisson_distribution<int> pois(1 + trial % 7);
    std::vector<double> v(37 + trial * 13);
    for (auto& x : v) x = pois(gen) * 0.5;
    Ecdf e(v);
    for (double s : e.support()) {
      EXPECT_EQ(e.quantile(e.eval(s)), s);
      EXPECT_GE(e.quantile(e.eval(s)), s);
    }
    auto cp = e.cum_probs();
    auto sp = e.support();
    for (std::size_t j = 0; j < sp.size(); ++j) {
      double gap = cp[j] - e.left(sp[j]);
      EXPECT_LE(e.quantile(e.left(sp[j]) + 0.5 * gap), sp[j]);
    }
  }
}

TEST(EcdfProperty, UniformWithinAtomMapsBack) {
  std::vector<double> v = {0, 0, 0, 1, 1, 4, 4, 4, 4, 9};
  Ecdf e(v);
  DrawKey key{11, Domain::test, 0, 0};
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    double x = e.support()[static_cast<std::size_t>(i) % e.support().size()];
    double lo = e.left(x), hi = e.eval(x);
    double u = lo + (hi - lo) * keyed_uniform(key, static_cast<std::uint64_t>(i));
    if (e.quantile(u) != x) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(EcdfProperty, MonotoneRightContinuous) {
  std::vector<double> v = {0.5, 1.5, 1.5, 3.0};
  Ecdf e(v);
  double prev = 0;
  for (double x = -1; x <= 4; x += 0.01) {
    double f = e.eval(x);
    EXPECT_GE(f, prev);
    prev = f;
  }
  for (double s : e.support()) {
    EXPECT_EQ(e.eval(s), e.eval(s + 1e-12));
    EXPECT_LT(e.eval(s - 1e-12), e.eval(s));
  }
}

TEST(Wasserstein, HandComputed) {
  std::vector<double> a = {0, 1}, b = {0, 3};
  // Quantile difference is 0 on [0, 0.5) and 2 on [0.5, 1].
  EXPECT_DOUBLE_EQ(wasserstein_qq(Ecdf(a), Ecdf(b), 1), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein_qq(Ecdf(a), Ecdf(b), 2), 2.0);
  EXPECT_DOUBLE_EQ(wasserstein_qq(Ecdf(a), Ecdf(a), 2), 0.0);
}

TEST(Ks, TwoSampleAndUniform) {
  std::vector<double> a = {1, 2, 3}, b = {1, 2, 3}, c = {10, 11};
  EXPECT_EQ(ks_two_sample(a, b), 0.0);
  EXPECT_EQ(ks_two_sample(a, c), 1.0);
  std::vector<double> u = {0.25, 0.75};
  EXPECT_DOUBLE_EQ(ks_uniform(u), 0.25);
}
