#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "parity_forge/error.hpp"
#include "parity_forge/predict.hpp"
#include "parity_forge/rng.hpp"
#include "parity_forge/special.hpp"

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

struct LabeledData {
  Dataset ds;
  std::vector<double> y;
};

// z protected; b binary, x continuous, c categorical with three levels.
// y ~ Bern(sigmoid(-0.5 + 1.2 b + 0.8 x)) unless `coin`.
LabeledData labeled(std::size_t n, std::uint64_t seed, bool coin = false) {
  DrawKey k{seed, Domain::test, 0, 0};
  std::vector<double> z(n), b(n), x(n), c(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = keyed_uniform(k, i, 0) < 0.5 ? 1 : 0;
    b[i] = keyed_uniform(k, i, 1) < 0.4 ? 1 : 0;
    x[i] = keyed_normal(k.with_step(1), i, 0);
    c[i] = std::floor(3 * keyed_uniform(k.with_step(1), i, 1));
    double p = coin ? 0.5 : sigmoid(-0.5 + 1.2 * b[i] + 0.8 * x[i]);
    y[i] = keyed_uniform(k.with_step(2), i, 0) < p ? 1 : 0;
  }
  Dataset ds({Column({"z", Scale::binary, Role::protected_attr}, z),
              Column({"b", Scale::binary, Role::feature}, b),
              Column({"x", Scale::continuous, Role::feature}, x),
              Column({"c", Scale::categorical, Role::feature}, c, {"hi", "lo", "mid"}),
              Column({"y", Scale::binary, Role::response}, y)});
  return {std::move(ds), std::move(y)};
}

ForestParams small_forest() {
  ForestParams hp;
  hp.trees = 60;
  return hp;
}

}  // namespace

TEST(Roc, WorkedExample) {
  std::vector<double> s{0.1, 0.4, 0.35, 0.8}, l{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s, l).auc, 0.75);
}

TEST(Roc, TiesAndSeparation) {
  std::vector<double> l{0, 1, 0, 1, 1};
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>(5, 0.3), l).auc, 0.5);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0.1, 0.7, 0.2, 0.9, 0.8}, l).auc, 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{0.9, 0.1, 0.8, 0.2, 0.3}, l).auc, 0.0);
}

TEST(Roc, SingleClassIsUndefined) {
  std::vector<double> s{0.1, 0.2}, l{1, 1};
  EXPECT_EQ(kind_of([&] { roc_auc(s, l); }), ErrorKind::undefined);
}

TEST(Roc, TrapezoidMatchesRankAuc) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    DrawKey k{seed, Domain::test, 0, 0};
    std::vector<double> s(300), l(300);
    for (std::size_t i = 0; i < s.size(); ++i) {
      l[i] = keyed_uniform(k, i, 0) < 0.4 ? 1 : 0;
      // Coarse scores force ties.
      s[i] = std::round(10 * (keyed_uniform(k, i, 1) + 0.3 * l[i])) / 10;
    }
    auto r = roc_auc(s, l);
    EXPECT_NEAR(trapezoid_area(r.points), r.auc, 1e-12);
    EXPECT_EQ(r.points.front().fpr, 0.0);
    EXPECT_EQ(r.points.back().fpr, 1.0);
    EXPECT_EQ(r.points.back().tpr, 1.0);
  }
}

TEST(Roc, InvariantUnderMonotoneTransform) {
  DrawKey k{3, Domain::test, 0, 0};
  std::vector<double> s(200), t(200), l(200);
  for (std::size_t i = 0; i < s.size(); ++i) {
    l[i] = keyed_uniform(k, i, 0) < 0.5 ? 1 : 0;
    s[i] = std::round(20 * (keyed_uniform(k, i, 1) + 0.2 * l[i])) / 20;
    t[i] = std::exp(3 * s[i]) - 7;
  }
  EXPECT_EQ(roc_auc(s, l).auc, roc_auc(t, l).auc);
}

TEST(GroupMetrics, HandBuiltCounts) {
  // g1: TP=3, FP=1, TN=4, FN=2; g2: TP=2, FP=2, TN=5, FN=1.
  std::vector<double> s, l;
  std::vector<std::size_t> g;
  auto add = [&](std::size_t grp, int count, double score, double label) {
    for (int i = 0; i < count; ++i) {
      s.push_back(score);
      l.push_back(label);
      g.push_back(grp);
    }
  };
  add(0, 3, 0.9, 1); add(0, 1, 0.6, 0); add(0, 4, 0.2, 0); add(0, 2, 0.1, 1);
  add(1, 2, 0.9, 1); add(1, 2, 0.5, 0); add(1, 5, 0.2, 0); add(1, 1, 0.4, 1);
  auto m = group_metrics(s, l, g, {"g1", "g2"});
  ASSERT_EQ(m.groups.size(), 2u);
  EXPECT_DOUBLE_EQ(m.groups[0].c.acc(), 0.7);
  EXPECT_DOUBLE_EQ(m.groups[0].c.ppv(), 0.75);
  EXPECT_DOUBLE_EQ(m.groups[0].c.npv(), 2.0 / 3);
  EXPECT_DOUBLE_EQ(m.groups[0].c.fpr(), 0.2);
  EXPECT_DOUBLE_EQ(m.groups[1].c.acc(), 0.7);
  EXPECT_DOUBLE_EQ(m.groups[1].c.ppv(), 0.5);
  EXPECT_DOUBLE_EQ(m.groups[1].c.npv(), 5.0 / 6);
  EXPECT_DOUBLE_EQ(m.groups[1].c.fpr(), 2.0 / 7);
  EXPECT_DOUBLE_EQ(m.mad_ppv, 0.125);
  EXPECT_DOUBLE_EQ(m.mad_acc, 0.0);
}

TEST(GroupMetrics, PerfectSingleGroup) {
  std::vector<double> s{0.9, 0.8, 0.1, 0.2}, l{1, 1, 0, 0};
  std::vector<std::size_t> g(4, 0);
  auto m = group_metrics(s, l, g, {"all"});
  const auto& c = m.groups[0].c;
  EXPECT_EQ(c.acc(), 1.0);
  EXPECT_EQ(c.ppv(), 1.0);
  EXPECT_EQ(c.npv(), 1.0);
  EXPECT_EQ(c.fpr(), 0.0);
  EXPECT_EQ(m.mad_acc, 0.0);
  EXPECT_EQ(m.mad_fpr, 0.0);
}

TEST(GroupMetrics, UndefinedPpvExcludedFromMad) {
  std::vector<double> s{0.1, 0.2, 0.9, 0.1, 0.7, 0.2}, l{0, 1, 1, 0, 0, 1};
  std::vector<std::size_t> g{0, 0, 1, 1, 2, 2};
  auto m = group_metrics(s, l, g, {"a", "b", "c"});
  EXPECT_TRUE(std::isnan(m.groups[0].c.ppv()));
  // ppv over b, c = {1, 0}: median 0.5, mad 0.5.
  EXPECT_DOUBLE_EQ(m.mad_ppv, 0.5);
}

TEST(GroupMetrics, PartitionReproducesPooled) {
  auto d = labeled(500, 11);
  DrawKey k{11, Domain::test, 0, 5};
  std::vector<double> s(500);
  std::vector<std::size_t> g(500);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = keyed_uniform(k, i, 0);
    g[i] = static_cast<std::size_t>(std::floor(4 * keyed_uniform(k, i, 1)));
  }
  auto m = group_metrics(s, d.y, g, {"a", "b", "c", "d"});
  Confusion sum;
  for (const auto& r : m.groups) {
    sum.tp += r.c.tp;
    sum.fp += r.c.fp;
    sum.tn += r.c.tn;
    sum.fn += r.c.fn;
  }
  EXPECT_EQ(sum.tp, m.pooled.tp);
  EXPECT_EQ(sum.fp, m.pooled.fp);
  EXPECT_EQ(sum.tn, m.pooled.tn);
  EXPECT_EQ(sum.fn, m.pooled.fn);
  EXPECT_EQ(sum.acc(), m.pooled.acc());
}

TEST(GroupMetrics, ThresholdOutsideUnitIntervalRejected) {
  std::vector<double> s{0.5}, l{1};
  std::vector<std::size_t> g{0};
  EXPECT_EQ(kind_of([&] { group_metrics(s, l, g, {"a"}, 1.0); }), ErrorKind::config);
}

TEST(ParityGap, IdenticalAndDisjoint) {
  std::vector<double> s{0.1, 0.5, 0.9, 0.1, 0.5, 0.9};
  std::vector<std::size_t> g{0, 0, 0, 1, 1, 1};
  EXPECT_EQ(parity_gap(s, g, {"a", "b"}).gap, 0.0);
  std::vector<double> d{0.1, 0.2, 0.3, 0.7, 0.8, 0.9};
  EXPECT_EQ(parity_gap(d, g, {"a", "b"}).gap, 1.0);
}

TEST(ParityGap, SingletonGroupExcluded) {
  std::vector<double> s{0.1, 0.5, 0.9, 0.2, 0.3};
  std::vector<std::size_t> g{0, 0, 1, 2, 2};
  auto pg = parity_gap(s, g, {"a", "b", "c"});
  ASSERT_EQ(pg.excluded.size(), 1u);
  EXPECT_EQ(pg.excluded[0], "b");
  std::vector<double> s1{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::size_t> lone{0, 0, 0, 0, 1};
  EXPECT_EQ(kind_of([&] { parity_gap(s1, lone, {"a", "b"}); }), ErrorKind::undefined);
}

TEST(Forest, RecoversBinaryFeature) {
  auto d = labeled(400, 5);
  const auto& b = d.ds.column("b").values();
  std::vector<double> y(b.begin(), b.end());
  auto p = fit_predictor(PredictorKind::random_forest, d.ds, {"b", "x", "c"}, y, {}, small_forest(), 9);
  auto s = p.score(d.ds);
  auto m = group_metrics(s, y, std::vector<std::size_t>(y.size(), 0), {"all"});
  EXPECT_EQ(m.pooled.acc(), 1.0);
}

TEST(Forest, LeafFractionsAndDepthCap) {
  auto d = labeled(600, 6);
  ForestParams hp = small_forest();
  hp.max_depth = 3;
  auto p = fit_predictor(PredictorKind::random_forest, d.ds, {"b", "x", "c"}, d.y, {}, hp, 2);
  for (const auto& t : p.forest().trees()) {
    EXPECT_LE(t.depth, 3u);
    for (const auto& nd : t.nodes) {
      EXPECT_GE(nd.value, 0.0);
      EXPECT_LE(nd.value, 1.0);
    }
  }
}

TEST(Forest, RowOrderDoesNotMatter) {
  auto d = labeled(300, 8);
  FeatureMatrix fm = encode_features(d.ds, {"b", "x", "c"});
  std::vector<std::uint64_t> ids(300);
  std::iota(ids.begin(), ids.end(), 0);
  Forest a = Forest::train(fm.X, d.y, small_forest(), 4, ids);

  std::vector<std::size_t> perm(300);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + 77, perm.end());
  RowMatrix Xp(fm.X.rows(), fm.X.cols());
  std::vector<double> yp(300);
  std::vector<std::uint64_t> idp(300);
  for (std::size_t r = 0; r < perm.size(); ++r) {
    Xp.row(static_cast<Eigen::Index>(r)) = fm.X.row(static_cast<Eigen::Index>(perm[r]));
    yp[r] = d.y[perm[r]];
    idp[r] = perm[r];
  }
  Forest b = Forest::train(Xp, yp, small_forest(), 4, idp);
  EXPECT_EQ(a.predict(fm.X), b.predict(fm.X));
}

TEST(Forest, SerialAndParallelIdentical) {
  auto d = labeled(500, 12);
  auto ps = fit_predictor(PredictorKind::random_forest, d.ds, {"b", "x", "c"}, d.y, {},
                          small_forest(), 1, Execution::serial);
  auto pp = fit_predictor(PredictorKind::random_forest, d.ds, {"b", "x", "c"}, d.y, {},
                          small_forest(), 1, Execution::parallel);
  EXPECT_EQ(ps.score(d.ds, {}, Execution::serial), pp.score(d.ds, {}, Execution::parallel));
}

TEST(Predictor, ProtectedOrResponseFeatureRejected) {
  auto d = labeled(100, 1);
  EXPECT_EQ(kind_of([&] {
              fit_predictor(PredictorKind::logistic, d.ds, {"x", "z"}, d.y, {}, {}, 1);
            }),
            ErrorKind::contract);
  EXPECT_EQ(kind_of([&] {
              fit_predictor(PredictorKind::random_forest, d.ds, {"y"}, d.y, {}, {}, 1);
            }),
            ErrorKind::contract);
}

TEST(Predictor, CoinFlipsGiveChanceAuc) {
  auto d = labeled(10000, 21, true);
  auto split = stratified_split(d.y, 21);
  auto p = fit_predictor(PredictorKind::random_forest, d.ds, {"b", "x", "c"}, d.y, split.train,
                         small_forest(), 21);
  auto s = p.score(d.ds, split.test);
  std::vector<double> yt;
  for (auto i : split.test) yt.push_back(d.y[i]);
  double auc = roc_auc(s, yt).auc;
  EXPECT_GE(auc, 0.45);
  EXPECT_LE(auc, 0.55);
}

TEST(Predictor, LogisticRecoversCoefficients) {
  auto d = labeled(10000, 31);
  auto p = fit_predictor(PredictorKind::logistic, d.ds, {"b", "x"}, d.y, {}, {}, 1);
  DesignMatrix dm;
  dm.names = {std::string(kIntercept), "b", "x"};
  dm.X.resize(10000, 3);
  dm.X.col(0).setOnes();
  dm.X.rightCols(2) = encode_features(d.ds, {"b", "x"}).X;
  auto ref = fit_conditional(Family::logistic_binary, d.y, dm);
  const double truth[] = {-0.5, 1.2, 0.8};
  auto beta = p.logistic().mean_coefficients();
  for (int j = 0; j < 3; ++j) {
    double se = ref.diagnostics().std_errors[static_cast<std::size_t>(j)];
    EXPECT_LT(std::fabs(beta[j] - truth[j]), 3 * se) << j;
  }
}

TEST(Predictor, CategoricalOneHotAgainstFirstLevel) {
  auto d = labeled(50, 2);
  auto fm = encode_features(d.ds, {"c", "x"});
  EXPECT_EQ(fm.names, (std::vector<std::string>{"c=lo", "c=mid", "x"}));
}

TEST(Ensemble, SingleReplicateMatchesSingleFit) {
  auto d = labeled(400, 15);
  auto split = stratified_split(d.y, 15);
  std::vector<Dataset> reps{d.ds};
  auto e = predict_ensemble(PredictorKind::random_forest, reps, {"b", "x"}, d.y, split.train,
                            split.test, small_forest(), 15);
  auto p = fit_predictor(PredictorKind::random_forest, d.ds, {"b", "x"}, d.y, split.train,
                         small_forest(), derive_seed(15, 0));
  EXPECT_EQ(e, p.score(d.ds, split.test));
  for (double v : e) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Ensemble, FailureNamesReplicate) {
  auto d = labeled(100, 3);
  std::vector<Dataset> reps{d.ds, d.ds.select({"z", "b", "y"})};
  try {
    predict_ensemble(PredictorKind::logistic, reps, {"b", "x"}, d.y, {}, {}, {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("replicate 2"), std::string::npos);
  }
}

TEST(Split, StratifiedAndDisjoint) {
  auto d = labeled(1001, 4);
  auto s = stratified_split(d.y, 4);
  EXPECT_EQ(s.train.size() + s.test.size(), 1001u);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
  double pos_train = 0, pos = std::accumulate(d.y.begin(), d.y.end(), 0.0);
  for (auto i : s.train) pos_train += d.y[i];
  EXPECT_NEAR(pos_train, pos / 2, 1.0);
  EXPECT_EQ(stratified_split(d.y, 4).train, s.train);
}

TEST(Report, GridsAndExports) {
  auto d = labeled(400, 7);
  DrawKey k{7, Domain::test, 0, 9};
  std::vector<double> s(400);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = keyed_uniform(k, i);
  const auto& zv = d.ds.column("z").values();
  std::vector<std::size_t> g(zv.begin(), zv.end());
  auto r = parity_report("unadjusted", PredictorKind::random_forest, 1, s, d.y, g, {"0", "1"});
  EXPECT_EQ(r.grid.size(), 101u);
  EXPECT_EQ(r.cdf.size(), 2u);
  EXPECT_EQ(r.cdf[0].back(), 1.0);
  auto j = to_json(r);
  EXPECT_EQ(j["model"], "rf");
  EXPECT_EQ(metrics_csv({r}).substr(0, 30), "arm,group,n,acc,ppv,npv,fpr\nun");
  EXPECT_NE(roc_csv({r}).find("unadjusted,Inf,0,0"), std::string::npos);
  auto grid = score_grid_csv({r});
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 203);
}
