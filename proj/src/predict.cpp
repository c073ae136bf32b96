#include "parity_forge/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "parity_forge/empirical.hpp"
#include "parity_forge/error.hpp"
#include "parity_forge/rng.hpp"
#include "parity_forge/special.hpp"

namespace parity_forge {

std::string_view to_string(PredictorKind k) {
  return k == PredictorKind::logistic ? "logistic" : "rf";
}

PredictorKind parse_predictor_kind(std::string_view s) {
  if (s == "logistic") return PredictorKind::logistic;
  if (s == "rf" || s == "random_forest") return PredictorKind::random_forest;
  throw Error(ErrorKind::config, "unknown model '" + std::string(s) + "' (rf, logistic)");
}

namespace {

std::vector<std::size_t> all_rows(std::size_t n, std::span<const std::size_t> rows) {
  if (!rows.empty()) return {rows.begin(), rows.end()};
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

FeatureMatrix encode_features(const Dataset& ds, const std::vector<std::string>& columns,
                              std::span<const std::size_t> rows) {
  auto idx = all_rows(ds.rows(), rows);
  FeatureMatrix fm;
  std::vector<std::pair<const Column*, int>> spec;  // level index or -1 for numeric
  for (const auto& name : columns) {
    const Column& c = ds.column(name);
    if (c.spec().scale == Scale::categorical) {
      for (std::size_t l = 1; l < c.levels().size(); ++l) {
        fm.names.push_back(name + "=" + c.levels()[l]);
        spec.emplace_back(&c, static_cast<int>(l));
      }
    } else {
      fm.names.push_back(name);
      spec.emplace_back(&c, -1);
    }
  }
  fm.X.resize(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(spec.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t k = 0; k < spec.size(); ++k) {
      double v = spec[k].first->values()[idx[r]];
      fm.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          spec[k].second < 0 ? v : (v == spec[k].second ? 1.0 : 0.0);
    }
  }
  return fm;
}

Predictor fit_predictor(PredictorKind kind, const Dataset& ds,
                        const std::vector<std::string>& features, std::span<const double> y,
                        std::span<const std::size_t> rows, const ForestParams& hp,
                        std::uint64_t seed, Execution exec) {
  if (y.size() != ds.rows()) throw Error(ErrorKind::contract, "labels and dataset differ in length");
  for (const auto& name : features) {
    Role role = ds.column(name).spec().role;
    if (role == Role::protected_attr) {
      throw Error(ErrorKind::contract,
                  "protected column '" + name + "' cannot be used as a predictor feature");
    }
    if (role == Role::response) {
      throw Error(ErrorKind::contract, "response column '" + name + "' cannot be a feature");
    }
  }
  auto idx = all_rows(ds.rows(), rows);
  std::vector<double> ysub(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    ysub[r] = y[idx[r]];
    if (ysub[r] != 0.0 && ysub[r] != 1.0) {
      throw Error(ErrorKind::contract, "predictor labels must be 0 or 1");
    }
  }
  FeatureMatrix fm = encode_features(ds, features, idx);
  Predictor p;
  p.kind_ = kind;
  p.columns_ = features;
  p.feature_names_ = fm.names;
  if (kind == PredictorKind::logistic) {
    DesignMatrix d;
    d.names.emplace_back(kIntercept);
    d.names.insert(d.names.end(), fm.names.begin(), fm.names.end());
    d.X.resize(fm.X.rows(), fm.X.cols() + 1);
    d.X.col(0).setOnes();
    d.X.rightCols(fm.X.cols()) = fm.X;
    FitOptions fo;
    fo.std_errors = false;
    p.logistic_ = fit_conditional(Family::logistic_binary, ysub, d, fo);
  } else {
    std::vector<std::uint64_t> ids(idx.begin(), idx.end());
    p.forest_ = Forest::train(fm.X, ysub, hp, seed, ids, exec);
  }
  return p;
}

std::vector<double> Predictor::score(const Dataset& ds, std::span<const std::size_t> rows,
                                     Execution exec) const {
  FeatureMatrix fm = encode_features(ds, columns_, rows);
  if (fm.names != feature_names_) {
    throw Error(ErrorKind::contract, "feature encoding differs from the training data");
  }
  if (kind_ == PredictorKind::random_forest) return forest_.predict(fm.X, exec);
  Eigen::VectorXd beta = logistic_.mean_coefficients();
  std::vector<double> out(static_cast<std::size_t>(fm.X.rows()));
  for (Eigen::Index i = 0; i < fm.X.rows(); ++i) {
    double eta = beta[0] + fm.X.row(i).dot(beta.tail(beta.size() - 1));
    out[static_cast<std::size_t>(i)] = sigmoid(eta);
  }
  return out;
}

std::vector<double> predict_ensemble(PredictorKind kind, const std::vector<Dataset>& replicates,
                                     const std::vector<std::string>& features,
                                     std::span<const double> y, std::span<const std::size_t> train,
                                     std::span<const std::size_t> test, const ForestParams& hp,
                                     std::uint64_t seed, Execution exec) {
  if (replicates.empty()) throw Error(ErrorKind::contract, "ensemble is empty");
  std::vector<double> mean;
  for (std::size_t m = 0; m < replicates.size(); ++m) {
    std::vector<double> s;
    try {
      auto p = fit_predictor(kind, replicates[m], features, y, train, hp, derive_seed(seed, m), exec);
      s = p.score(replicates[m], test, exec);
    } catch (const Error& e) {
      if (replicates.size() == 1) throw;
      throw Error(e.kind(), "replicate " + std::to_string(m + 1) + ": " + e.what());
    }
    if (mean.empty()) mean.assign(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) mean[i] += s[i];
  }
  for (double& v : mean) v /= static_cast<double>(replicates.size());
  return mean;
}

Split stratified_split(std::span<const double> labels, std::uint64_t seed, double train_fraction) {
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw Error(ErrorKind::config, "train fraction must lie in (0, 1)");
  }
  DrawKey key{seed, Domain::split};
  Split s;
  for (double cls : {0.0, 1.0}) {
    std::vector<std::pair<double, std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.emplace_back(keyed_uniform(key, i), i);
    }
    std::sort(members.begin(), members.end());
    auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < cut ? s.train : s.test).push_back(members[k].second);
    }
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

RocResult roc_auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::contract, "scores and labels differ");
  double n1 = 0, n0 = 0;
  for (double l : labels) {
    if (l == 1.0) ++n1;
    else if (l == 0.0) ++n0;
    else throw Error(ErrorKind::contract, "ROC labels must be 0 or 1");
  }
  if (n1 == 0 || n0 == 0) throw Error(ErrorKind::undefined, "ROC/AUC undefined with a single class");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocResult r;
  r.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  // Walking thresholds downward; within a tie block positives and negatives
  // enter together, which is the mid-rank convention.
  double tp = 0, fp = 0, area2 = 0;
  std::size_t k = 0;
  while (k < order.size()) {
    double s = scores[order[k]];
    double btp = 0, bfp = 0;
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1.0 ? btp : bfp) += 1;
      ++k;
    }
    // Concordant pairs: negatives in this block against positives above, plus
    // half of the tied pairs.
    area2 += bfp * (2 * tp + btp);
    tp += btp;
    fp += bfp;
    r.points.push_back({s, fp / n0, tp / n1});
  }
  r.auc = area2 / (2 * n1 * n0);
  return r;
}

double trapezoid_area(const std::vector<RocPoint>& pts) {
  double a = 0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    a += (pts[k].fpr - pts[k - 1].fpr) * (pts[k].tpr + pts[k - 1].tpr) / 2;
  }
  return a;
}

double Confusion::acc() const { return n() > 0 ? (tp + tn) / n() : kNaN; }
double Confusion::ppv() const { return tp + fp > 0 ? tp / (tp + fp) : kNaN; }
double Confusion::npv() const { return tn + fn > 0 ? tn / (tn + fn) : kNaN; }
double Confusion::fpr() const { return fp + tn > 0 ? fp / (fp + tn) : kNaN; }

double median_abs_dev(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return kNaN;
  std::vector<double> s = values;
  std::sort(s.begin(), s.end());
  std::size_t m = s.size();
  double med = m % 2 ? s[m / 2] : 0.5 * (s[m / 2 - 1] + s[m / 2]);
  double d = 0;
  for (double v : values) d += std::fabs(v - med);
  return d / static_cast<double>(m);
}

GroupMetrics group_metrics(std::span<const double> scores, std::span<const double> labels,
                           std::span<const std::size_t> groups,
                           const std::vector<std::string>& group_labels, double threshold) {
  if (!(threshold > 0 && threshold < 1)) {
    throw Error(ErrorKind::config, "classification threshold must lie in (0, 1)");
  }
  if (scores.size() != labels.size() || groups.size() != labels.size()) {
    throw Error(ErrorKind::contract, "scores, labels and groups differ in length");
  }
  std::size_t k = group_labels.size();
  for (auto g : groups) k = std::max(k, g + 1);
  std::vector<Confusion> c(k);
  GroupMetrics gm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool pred = scores[i] >= threshold;
    bool pos = labels[i] == 1.0;
    Confusion& cg = c[groups[i]];
    double& cell = pred ? (pos ? cg.tp : cg.fp) : (pos ? cg.fn : cg.tn);
    cell += 1;
    double& pooled = pred ? (pos ? gm.pooled.tp : gm.pooled.fp) : (pos ? gm.pooled.fn : gm.pooled.tn);
    pooled += 1;
  }
  std::vector<double> acc, ppv, npv, fpr;
  for (std::size_t g = 0; g < k; ++g) {
    if (c[g].n() == 0) continue;
    gm.groups.push_back({g < group_labels.size() ? group_labels[g] : std::to_string(g), c[g]});
    acc.push_back(c[g].acc());
    ppv.push_back(c[g].ppv());
    npv.push_back(c[g].npv());
    fpr.push_back(c[g].fpr());
  }
  gm.mad_acc = median_abs_dev(acc);
  gm.mad_ppv = median_abs_dev(ppv);
  gm.mad_npv = median_abs_dev(npv);
  gm.mad_fpr = median_abs_dev(fpr);
  return gm;
}

ParityGap parity_gap(std::span<const double> scores, std::span<const std::size_t> groups,
                     const std::vector<std::string>& group_labels) {
  std::size_t k = group_labels.size();
  for (auto g : groups) k = std::max(k, g + 1);
  std::vector<std::vector<double>> by(k);
  for (std::size_t i = 0; i < scores.size(); ++i) by[groups[i]].push_back(scores[i]);
  auto label = [&](std::size_t g) { return g < group_labels.size() ? group_labels[g] : std::to_string(g); };
  ParityGap pg;
  std::vector<std::size_t> usable;
  for (std::size_t g = 0; g < k; ++g) {
    if (by[g].size() >= 2) usable.push_back(g);
    else if (by[g].size() == 1) pg.excluded.push_back(label(g));
  }
  if (usable.size() < 2) throw Error(ErrorKind::undefined, "parity gap needs at least two groups");
  for (std::size_t a = 0; a < usable.size(); ++a) {
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      double d = ks_two_sample(by[usable[a]], by[usable[b]]);
      if (d > pg.gap || pg.group_a.empty()) {
        pg.gap = d;
        pg.group_a = label(usable[a]);
        pg.group_b = label(usable[b]);
      }
    }
  }
  return pg;
}

ParityReport parity_report(std::string arm, PredictorKind kind, std::size_t replicates,
                           std::span<const double> scores, std::span<const double> labels,
                           std::span<const std::size_t> groups,
                           const std::vector<std::string>& group_labels, double threshold,
                           std::size_t grid_points) {
  ParityReport r;
  r.arm = std::move(arm);
  r.kind = kind;
  r.replicates = replicates;
  r.threshold = threshold;
  r.roc = roc_auc(scores, labels);
  r.metrics = group_metrics(scores, labels, groups, group_labels, threshold);
  r.gap = parity_gap(scores, groups, group_labels);
  grid_points = std::max<std::size_t>(grid_points, 2);
  for (std::size_t g = 0; g < grid_points; ++g) {
    r.grid.push_back(static_cast<double>(g) / static_cast<double>(grid_points - 1));
  }
  std::size_t k = group_labels.size();
  for (auto g : groups) k = std::max(k, g + 1);
  std::vector<std::vector<double>> by(k);
  for (std::size_t i = 0; i < scores.size(); ++i) by[groups[i]].push_back(scores[i]);
  for (std::size_t g = 0; g < k; ++g) {
    if (by[g].empty()) continue;
    r.grid_groups.push_back(g < group_labels.size() ? group_labels[g] : std::to_string(g));
    r.cdf.push_back(cdf_on_grid(by[g], r.grid));
    r.density.push_back(density_on_grid(by[g], r.grid));
  }
  return r;
}

namespace {

nlohmann::json number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const ParityReport& r) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : r.metrics.groups) {
    groups.push_back({{"group", g.group},
                      {"n", g.c.n()},
                      {"acc", number(g.c.acc())},
                      {"ppv", number(g.c.ppv())},
                      {"npv", number(g.c.npv())},
                      {"fpr", number(g.c.fpr())}});
  }
  const auto& p = r.metrics.pooled;
  return {{"arm", r.arm},
          {"model", to_string(r.kind)},
          {"replicates", r.replicates},
          {"threshold", r.threshold},
          {"auc", r.roc.auc},
          {"parity_gap", {{"gap", r.gap.gap}, {"between", {r.gap.group_a, r.gap.group_b}},
                          {"excluded", r.gap.excluded}}},
          {"groups", groups},
          {"pooled", {{"acc", number(p.acc())}, {"ppv", number(p.ppv())}, {"npv", number(p.npv())},
                      {"fpr", number(p.fpr())}}},
          {"mad", {{"acc", number(r.metrics.mad_acc)}, {"ppv", number(r.metrics.mad_ppv)},
                   {"npv", number(r.metrics.mad_npv)}, {"fpr", number(r.metrics.mad_fpr)}}}};
}

std::string roc_csv(const std::vector<ParityReport>& reports) {
  std::ostringstream os;
  os << "arm,threshold,fpr,tpr\n";
  for (const auto& r : reports) {
    for (const auto& pt : r.roc.points) {
      os << quote_csv_field(r.arm) << ',' << (std::isinf(pt.threshold) ? "Inf" : format_number(pt.threshold))
         << ',' << format_number(pt.fpr) << ',' << format_number(pt.tpr) << '\n';
    }
  }
  return os.str();
}

std::string metrics_csv(const std::vector<ParityReport>& reports) {
  std::ostringstream os;
  os << "arm,group,n,acc,ppv,npv,fpr\n";
  for (const auto& r : reports) {
    auto row = [&](const std::string& g, double n, double a, double b, double c, double d) {
      os << quote_csv_field(r.arm) << ',' << quote_csv_field(g) << ',' << format_number(n) << ','
         << format_number(a) << ',' << format_number(b) << ',' << format_number(c) << ','
         << format_number(d) << '\n';
    };
    for (const auto& g : r.metrics.groups) row(g.group, g.c.n(), g.c.acc(), g.c.ppv(), g.c.npv(), g.c.fpr());
    const auto& p = r.metrics.pooled;
    row("(pooled)", p.n(), p.acc(), p.ppv(), p.npv(), p.fpr());
    row("(mad)", static_cast<double>(r.metrics.groups.size()), r.metrics.mad_acc, r.metrics.mad_ppv,
        r.metrics.mad_npv, r.metrics.mad_fpr);
  }
  return os.str();
}

std::string score_grid_csv(const std::vector<ParityReport>& reports) {
  std::ostringstream os;
  os << "arm,group,score,cdf,density\n";
  for (const auto& r : reports) {
    for (std::size_t g = 0; g < r.grid_groups.size(); ++g) {
      for (std::size_t k = 0; k < r.grid.size(); ++k) {
        os << quote_csv_field(r.arm) << ',' << quote_csv_field(r.grid_groups[g]) << ','
           << format_number(r.grid[k]) << ',' << format_number(r.cdf[g][k]) << ','
           << format_number(r.density[g][k]) << '\n';
      }
    }
  }
  return os.str();
}

}  // namespace parity_forge
