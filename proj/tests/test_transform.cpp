#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <filesystem>
#include <set>

#include "lp_oracle.hpp"
#include "parity_forge/design.hpp"
#include "parity_forge/empirical.hpp"
#include "parity_forge/error.hpp"
#include "parity_forge/special.hpp"
#include "parity_forge/transform.hpp"
#include "transport_cases.hpp"

using namespace parity_forge;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::undefined;
}

std::vector<double> by_group(std::span<const double> v, std::span<const double> z, double g) {
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (z[i] == g) out.push_back(v[i]);
  }
  return out;
}

// z ~ Bern(0.5); x1 | z ~ N(z, 1); x2 | z ~ Pois(exp(0.2 + 0.5 z + 0.1 x1)).
Dataset two_feature_data(std::size_t n, std::uint64_t seed) {
  DrawKey k{seed, Domain::test, 0, 0};
  std::vector<double> z(n), x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = keyed_uniform(k, i, 0) < 0.5 ? 1 : 0;
    x1[i] = z[i] + keyed_normal(k, i, 1);
    double u = keyed_uniform(k.with_step(1), i, 0);
    x2[i] = static_cast<double>(poisson_from_uniform(u, std::exp(0.2 + 0.5 * z[i] + 0.1 * x1[i])));
    y[i] = keyed_uniform(k.with_step(1), i, 1) < 0.5 ? 1 : 0;
  }
  return Dataset({Column({"z", Scale::binary, Role::protected_attr}, z),
                  Column({"x1", Scale::continuous, Role::feature}, x1),
                  Column({"x2", Scale::count, Role::feature}, x2),
                  Column({"y", Scale::binary, Role::response}, y)});
}

ChainPlan two_feature_plan(std::size_t M, std::uint64_t seed) {
  ChainPlan p;
  p.steps = {{"x1", Family::gaussian_linear}, {"x2", Family::poisson}};
  p.replicates = M;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(Companions, IntervalMembership) {
  std::vector<double> v = {17, 18, 19, 25}, cuts = {18, 19, 20};
  EXPECT_EQ(make_companions(v, cuts), (std::vector<double>{0, 0, 1, 3}));
  EXPECT_EQ(make_companions(v, {}), (std::vector<double>{0, 0, 0, 0}));
}

TEST(Companions, DecileCutpoints) {
  std::vector<double> v(100);
  for (std::size_t i = 0; i < 100; ++i) v[i] = static_cast<double>((i * 37) % 100);
  CompanionSpec spec{"v", {}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}};
  auto cuts = resolve_cutpoints(spec, ColumnSpec{"v"}, v);
  auto bins = make_companions(v, cuts);
  std::vector<int> counts(11, 0);
  for (double b : bins) counts[static_cast<std::size_t>(b)]++;
  for (int b = 0; b < 10; ++b) EXPECT_EQ(counts[static_cast<std::size_t>(b)], 10);
  EXPECT_EQ(counts[10], 0);
}

TEST(Companions, RawScaleCutpointsFollowPreTransform) {
  ColumnSpec age{"age", Scale::continuous, Role::feature, PreTransform::log};
  CompanionSpec spec{"age", {18, 19, 20}, {}};
  std::vector<double> v = {std::log(18.0), std::log(19.5), std::log(40.0)};
  auto cuts = resolve_cutpoints(spec, age, v);
  EXPECT_EQ(make_companions(v, cuts), (std::vector<double>{0, 2, 3}));
}

TEST(Univariate, ContinuousIdentityWhenIndependent) {
  std::vector<double> x = {3.2, -1.0, 0.5, 3.2, 7.7, 0.5, 2.0};
  std::vector<std::size_t> codes(x.size(), 0);
  auto m = fit_empirical_by_group(x, codes, {"all"}, Support::continuous);
  Ecdf target(x);
  DesignMatrix rows;
  rows.names = {"group"};
  rows.X = RowMatrix::Zero(static_cast<Eigen::Index>(x.size()), 1);
  auto r = transform_univariate(x, rows, m, target, DrawKey{1});
  EXPECT_EQ(r.values, x);
}

TEST(Univariate, ConstantAtomicMapsToTarget) {
  const std::size_t n = 20000;
  std::vector<double> x(n, 4.0);
  std::vector<std::size_t> codes(n, 0);
  auto m = fit_empirical_by_group(x, codes, {"all"}, Support::atomic);
  std::vector<double> tsample = {1, 2, 2, 3, 3, 3, 9, 9};
  Ecdf target(tsample);
  DesignMatrix rows;
  rows.names = {"group"};
  rows.X = RowMatrix::Zero(static_cast<Eigen::Index>(n), 1);
  auto r = transform_univariate(x, rows, m, target, DrawKey{3});
  Ecdf got(r.values);
  for (double s : target.support()) EXPECT_NEAR(got.mass(s), target.mass(s), 0.015);
}

TEST(Univariate, TwoGroupGaussianRemovesDependence) {
  const std::size_t n = 100000;
  DrawKey k{5, Domain::test, 0, 0};
  std::vector<double> z(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = keyed_uniform(k, i, 0) < 0.5 ? 1 : 0;
    x[i] = z[i] + keyed_normal(k, i, 1);
  }
  DesignBuilder b(n);
  b.add_numeric("z", z);
  auto d = b.build();
  auto m = fit_conditional(Family::gaussian_linear, x, d);
  auto r = transform_univariate(x, d, m, Ecdf(x), DrawKey{1});
  EXPECT_GT(ks_two_sample(by_group(x, z, 0), by_group(x, z, 1)), 0.3);
  EXPECT_LT(ks_two_sample(by_group(r.values, z, 0), by_group(r.values, z, 1)), 0.01);
}

TEST(Univariate, TrueConditionalCdfGapShrinksLikeRootN) {
  std::vector<double> gaps;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    double total = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      DrawKey k{100 + s, Domain::test, 0, 0};
      std::vector<double> z(n), x(n);
      for (std::size_t i = 0; i < n; ++i) {
        z[i] = keyed_uniform(k, i, 0) < 0.5 ? 1 : 0;
        x[i] = z[i] + keyed_normal(k, i, 1);
      }
      DesignBuilder b(n);
      b.add_numeric("z", z);
      auto d = b.build();
      Eigen::VectorXd truth(3);
      truth << 0.0, 1.0, 0.0;
      auto m = CondModel::parametric(Family::gaussian_linear, d.names, truth);
      auto r = transform_univariate(x, d, m, Ecdf(x), DrawKey{s});
      total += ks_two_sample(by_group(r.values, z, 0), by_group(r.values, z, 1));
    }
    gaps.push_back(total / 5);
  }
  // Tenfold n shrinks the gap by about sqrt(10).
  EXPECT_LT(gaps[1], gaps[0] / 2);
  EXPECT_LT(gaps[2], gaps[1] / 2);
  EXPECT_LT(gaps[2], 0.015);
}

TEST(Univariate, RankPreservedWithinGroup) {
  auto ds = two_feature_data(3000, 8);
  auto e = chain_transform(ds, two_feature_plan(1, 1));
  auto z = ds.column("z").values();
  auto x1 = ds.column("x1").values();
  auto t1 = e.replicates[0].column("x1").values();
  for (double g : {0.0, 1.0}) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] == g) pairs.emplace_back(x1[i], t1[i]);
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i) EXPECT_LE(pairs[i - 1].second, pairs[i].second);
  }
}

TEST(Univariate, SerialAndParallelAgree) {
  auto pair = pf_test::random_pair(77);
  auto a = pf_test::monte_carlo_cost(pair, 2.0, 20000, 3, Execution::serial);
  auto b = pf_test::monte_carlo_cost(pair, 2.0, 20000, 3, Execution::parallel);
  EXPECT_EQ(a.mean, b.mean);
}

TEST(Univariate, ZeroMassAndNan) {
  std::vector<double> x = {0, 1, 7};
  std::vector<std::string> names = {std::string(kIntercept)};
  Eigen::VectorXd p(2);
  p << 50.0, 0.0;  // pi ~ 1: no mass on positive counts
  auto m = CondModel::parametric(Family::zero_inflated_poisson, names, p);
  auto rows = intercept_design(3);
  Ecdf target(x);
  try {
    transform_univariate(x, rows, m, target, DrawKey{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::zero_mass);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
  UnivariateOptions opts;
  opts.allow_zero_mass = true;
  auto r = transform_univariate(x, rows, m, target, DrawKey{1}, opts);
  EXPECT_EQ(r.widened, 2u);
  EXPECT_FALSE(r.warnings.empty());
  // Widened draws land in the top 1/n of the target.
  EXPECT_EQ(r.values[1], 7.0);

  std::vector<double> bad = {0, std::nan("")};
  std::vector<double> ok = {0, 1};
  EXPECT_EQ(kind_of([&] { transform_univariate(bad, intercept_design(2), m, Ecdf(ok), DrawKey{1}); }),
            ErrorKind::propagation);
}

TEST(Transport, MonteCarloMatchesLinearProgram) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto pair = pf_test::random_pair(s);
    auto [xs, px] = pf_test::atoms_of(Ecdf(pair.source_sample));
    auto [ys, py] = pf_test::atoms_of(Ecdf(pair.target_sample));
    for (double q : {1.0, 2.0}) {
      double lp = pf_test::transport_lp(xs, px, ys, py, q);
      double integral = wasserstein_qq(Ecdf(pair.source_sample), Ecdf(pair.target_sample), q);
      EXPECT_NEAR(lp, integral, 1e-10) << "pair " << s << " q " << q;
      auto mc = pf_test::monte_carlo_cost(pair, q, 100000, s);
      EXPECT_LE(std::fabs(mc.mean - lp), std::max(3 * mc.se, 1e-9)) << "pair " << s << " q " << q;
    }
  }
}

TEST(Chain, SingleFeatureEqualsUnivariate) {
  auto ds = two_feature_data(500, 2);
  auto single = ds.select({"z", "x1", "y"});
  ChainPlan p;
  p.steps = {{"x1", Family::gaussian_linear}};
  p.replicates = 2;
  p.seed = 9;
  auto e = chain_transform(single, p);
  auto pw = pairwise_transform(single, p);

  DesignBuilder b(500);
  b.add_column(single.column("z"));
  auto d = b.build();
  auto m = fit_conditional(Family::gaussian_linear, single.column("x1").values(), d);
  auto r = transform_univariate(single.column("x1").values(), d, m, Ecdf(single.column("x1").values()),
                                DrawKey{9, Domain::transform, 0, 0});
  auto got = e.replicates[0].column("x1").values();
  EXPECT_TRUE(std::equal(got.begin(), got.end(), r.values.begin()));
  EXPECT_EQ(replicate_csv(e, 1), replicate_csv(pw, 1));
}

TEST(Chain, KeyingContract) {
  auto ds = two_feature_data(400, 3);
  auto p = two_feature_plan(2, 11);
  auto keyed = chain_transform(ds, p);
  EXPECT_NE(replicate_csv(keyed, 0), replicate_csv(keyed, 1));
  p.key_replicate = false;
  auto unkeyed = chain_transform(ds, p);
  EXPECT_EQ(replicate_csv(unkeyed, 0), replicate_csv(unkeyed, 1));
  // Replicate 0 is the same draw in both.
  EXPECT_EQ(replicate_csv(keyed, 0), replicate_csv(unkeyed, 0));
}

TEST(Chain, SerialAndParallelEnsemblesIdentical) {
  auto ds = two_feature_data(600, 4);
  auto p = two_feature_plan(4, 5);
  auto a = chain_transform(ds, p, Execution::serial);
  auto b = chain_transform(ds, p, Execution::parallel);
  for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(replicate_csv(a, m), replicate_csv(b, m));
  EXPECT_EQ(ensemble_manifest(a).dump(), ensemble_manifest(b).dump());
}

TEST(Chain, AdjustedValuesAreObservedValues) {
  auto ds = two_feature_data(800, 6);
  auto e = chain_transform(ds, two_feature_plan(3, 2));
  for (const char* col : {"x1", "x2"}) {
    auto orig = ds.column(col).values();
    std::set<double> seen(orig.begin(), orig.end());
    for (const auto& rep : e.replicates) {
      for (double v : rep.column(col).values()) ASSERT_TRUE(seen.count(v)) << col;
    }
  }
  // Untouched columns ride along.
  EXPECT_TRUE(std::ranges::equal(e.replicates[0].column("y").values(), ds.column("y").values()));
}

TEST(Chain, MarginalPreserved) {
  const std::size_t n = 5000;
  auto ds = two_feature_data(n, 7);
  auto e = chain_transform(ds, two_feature_plan(1, 2));
  for (const char* col : {"x1", "x2"}) {
    EXPECT_LT(ks_two_sample(e.replicates[0].column(col).values(), ds.column(col).values()),
              3 / std::sqrt(static_cast<double>(n)))
        << col;
  }
}

TEST(Chain, MutualRemovesGroupDifferences) {
  auto ds = two_feature_data(10000, 10);
  auto e = chain_transform(ds, two_feature_plan(1, 3));
  auto z = ds.column("z").values();
  for (const char* col : {"x1", "x2"}) {
    auto v = e.replicates[0].column(col).values();
    EXPECT_LT(ks_two_sample(by_group(v, z, 0), by_group(v, z, 1)), 0.03) << col;
  }
}

TEST(Chain, CompanionsEnterLaterDesigns) {
  auto ds = two_feature_data(1000, 12);
  auto p = two_feature_plan(1, 3);
  p.companions = {{"x1", {}, {0.25, 0.5, 0.75, 1.0}}};
  auto e = chain_transform(ds, p);
  const auto& design = e.fits[0][1].model["design"];
  std::set<std::string> names(design.begin(), design.end());
  EXPECT_TRUE(names.count("x1"));
  EXPECT_TRUE(names.count("x1*=1"));
  EXPECT_TRUE(names.count("x1*=3"));
  EXPECT_TRUE(e.fits[0][0].cached);
  EXPECT_FALSE(e.fits[0][1].cached);
  auto pw = pairwise_transform(ds, p);
  EXPECT_EQ(pw.fits[0][1].model["design"].size(), 2u);
}

TEST(Chain, PlanErrors) {
  auto ds = two_feature_data(200, 1);
  auto p = two_feature_plan(1, 1);
  p.steps[1].column = "nope";
  try {
    chain_transform(ds, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
  p = two_feature_plan(1, 1);
  p.steps.pop_back();
  EXPECT_EQ(kind_of([&] { chain_transform(ds, p); }), ErrorKind::config);
  p = two_feature_plan(1, 1);
  p.steps[1].family = Family::logistic_binary;
  EXPECT_EQ(kind_of([&] { chain_transform(ds, p); }), ErrorKind::config);
  p = two_feature_plan(1, 1);
  p.steps[0].companions = {{"x2", {1}, {}}};
  EXPECT_EQ(kind_of([&] { chain_transform(ds, p); }), ErrorKind::config);

  auto unprotected = Dataset({Column({"x1", Scale::continuous, Role::feature}, {1, 2, 3}),
                              Column({"y", Scale::binary, Role::response}, {0, 1, 0})});
  ChainPlan q;
  q.steps = {{"x1", Family::gaussian_linear}};
  EXPECT_EQ(kind_of([&] { pairwise_transform(unprotected, q); }), ErrorKind::role);
}

TEST(Chain, FitErrorsCarryContext) {
  auto ds = two_feature_data(300, 1);
  auto zeros = std::vector<double>(300, 0.0);
  auto bad = ds.with_values("x2", zeros);
  auto p = two_feature_plan(2, 1);
  p.steps[1].family = Family::zero_inflated_poisson;
  try {
    chain_transform(bad, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
    std::string msg = e.what();
    EXPECT_NE(msg.find("step 2 ('x2')"), std::string::npos);
    EXPECT_NE(msg.find("replicate"), std::string::npos);
  }
}

TEST(Export, FilesAndManifest) {
  auto ds = two_feature_data(100, 1);
  auto e = chain_transform(ds, two_feature_plan(2, 1));
  auto dir = (std::filesystem::temp_directory_path() / "pf_export_test").string();
  std::filesystem::remove_all(dir);
  auto paths = export_ensemble(e, dir, "sim");
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_TRUE(paths[1].ends_with("sim.adjusted.2.csv"));
  auto text = read_file(paths[0]);
  EXPECT_EQ(text.substr(0, text.find('\n')), "x1,x2");
  ExportOptions with_y;
  with_y.include_response = true;
  auto t2 = replicate_csv(e, 0, with_y);
  EXPECT_EQ(t2.substr(0, t2.find('\n')), "x1,x2,y");
  auto man = ensemble_manifest(e);
  EXPECT_EQ(man["replicates"], 2);
  EXPECT_EQ(man["fits"][1]["steps"][1]["model"]["family"], "poisson");
  std::filesystem::remove_all(dir);
}

TEST(ChainTransform, RecordsPitWhenAsked) {
  auto ds = two_feature_data(4000, 17);
  auto plan = two_feature_plan(2, 17);
  auto plain = chain_transform(ds, plan);
  EXPECT_TRUE(plain.fits[0][1].pit.empty());
  plan.record_pit = true;
  auto e = chain_transform(ds, plan);
  const auto& pit = e.fits[1][1].pit;
  ASSERT_EQ(pit.size(), 4000u);
  auto z = ds.column("z").values();
  for (double g : {0.0, 1.0}) {
    auto v = by_group(pit, z, g);
    EXPECT_LT(ks_uniform(v), 1.36 / std::sqrt(static_cast<double>(v.size())) * 1.5);
  }
  EXPECT_EQ(to_csv(e.replicates[1]), to_csv(plain.replicates[1]));
}

TEST(Chain, CategoricalProtectedInteractsThroughDummies) {
  const std::size_t n = 3000;
  DrawKey k{21, Domain::test, 0, 0};
  std::vector<double> g(n), x1(n), x2(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::floor(3 * keyed_uniform(k, i, 0));
    x1[i] = g[i] + keyed_normal(k, i, 1);
    x2[i] = (1 + 0.5 * g[i]) * x1[i] + keyed_normal(k.with_step(1), i, 0);
  }
  Dataset ds({Column({"g", Scale::categorical, Role::protected_attr}, g, {"a", "b", "c"}),
              Column({"x1", Scale::continuous, Role::feature}, x1),
              Column({"x2", Scale::continuous, Role::feature}, x2)});
  ChainPlan p;
  p.steps = {{"x1", Family::gaussian_linear}, {"x2", Family::gaussian_linear}};
  p.steps[1].interactions = true;
  p.replicates = 1;
  p.seed = 4;
  auto e = chain_transform(ds, p);
  const auto& design = e.fits[0][1].model["design"];
  std::set<std::string> names(design.begin(), design.end());
  EXPECT_TRUE(names.count("g=b:x1"));
  EXPECT_TRUE(names.count("g=c:x1"));
  EXPECT_FALSE(names.count("g=a:x1"));
}
