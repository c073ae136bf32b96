#pragma once

// Downstream classifiers trained on (adjusted) features, ensemble-averaged
// scores, ROC/AUC, per-group confusion metrics and the parity gap.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "parity_forge/condmodels.hpp"
#include "parity_forge/core.hpp"
#include "parity_forge/forest.hpp"
#include "parity_forge/transform.hpp"

namespace parity_forge {

enum class PredictorKind { logistic, random_forest };
std::string_view to_string(PredictorKind k);
PredictorKind parse_predictor_kind(std::string_view s);  // "logistic" | "rf"

// Feature matrix with categorical columns one-hot encoded against their
// first frozen level. Column names are stable across row subsets.
struct FeatureMatrix {
  std::vector<std::string> names;
  RowMatrix X;
};
FeatureMatrix encode_features(const Dataset& ds, const std::vector<std::string>& columns,
                              std::span<const std::size_t> rows = {});

class Predictor {
 public:
  PredictorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const CondModel& logistic() const { return logistic_; }
  const Forest& forest() const noexcept { return forest_; }

  // P(Y = 1) for the given rows (all rows when empty).
  std::vector<double> score(const Dataset& ds, std::span<const std::size_t> rows = {},
                            Execution exec = Execution::parallel) const;

  friend Predictor fit_predictor(PredictorKind, const Dataset&, const std::vector<std::string>&,
                                 std::span<const double>, std::span<const std::size_t>,
                                 const ForestParams&, std::uint64_t, Execution);

 private:
  PredictorKind kind_ = PredictorKind::random_forest;
  std::vector<std::string> columns_;
  std::vector<std::string> feature_names_;
  CondModel logistic_;
  Forest forest_;
};

// Trains on `rows` (all rows when empty) of the named feature columns. y is
// indexed like the dataset. Row indices key the forest bootstrap.
Predictor fit_predictor(PredictorKind kind, const Dataset& ds,
                        const std::vector<std::string>& features, std::span<const double> y,
                        std::span<const std::size_t> rows, const ForestParams& hp,
                        std::uint64_t seed, Execution exec = Execution::parallel);

// Fits one predictor per replicate on `train` and averages the scores on
// `test` across replicates.
std::vector<double> predict_ensemble(PredictorKind kind, const std::vector<Dataset>& replicates,
                                     const std::vector<std::string>& features,
                                     std::span<const double> y, std::span<const std::size_t> train,
                                     std::span<const std::size_t> test, const ForestParams& hp,
                                     std::uint64_t seed, Execution exec = Execution::parallel);

struct Split {
  std::vector<std::size_t> train, test;
};
// Stratified by label; each class is ordered by a keyed uniform and its first
// `train_fraction` goes to training.
Split stratified_split(std::span<const double> labels, std::uint64_t seed,
                       double train_fraction = 0.5);

struct RocPoint {
  double threshold;  // predicted positive when score >= threshold
  double fpr;
  double tpr;
};

struct RocResult {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  double auc = 0.0;
};

// Mid-rank (Mann-Whitney) AUC and ROC points at every distinct threshold.
RocResult roc_auc(std::span<const double> scores, std::span<const double> labels);

// Trapezoidal area under ROC points.
double trapezoid_area(const std::vector<RocPoint>& pts);

struct Confusion {
  double tp = 0, fp = 0, tn = 0, fn = 0;
  double n() const { return tp + fp + tn + fn; }
  double acc() const;
  double ppv() const;  // NaN when nothing is predicted positive
  double npv() const;  // NaN when nothing is predicted negative
  double fpr() const;  // NaN when the group has no negatives
};

struct GroupMetricRow {
  std::string group;
  Confusion c;
};

struct GroupMetrics {
  std::vector<GroupMetricRow> groups;
  Confusion pooled;
  // Mean absolute deviation from the median across groups, undefined groups
  // excluded; order acc, ppv, npv, fpr.
  double mad_acc = 0, mad_ppv = 0, mad_npv = 0, mad_fpr = 0;
};

GroupMetrics group_metrics(std::span<const double> scores, std::span<const double> labels,
                           std::span<const std::size_t> groups,
                           const std::vector<std::string>& group_labels, double threshold = 0.5);

// Mean absolute deviation around the median of the finite values.
double median_abs_dev(std::vector<double> values);

struct ParityGap {
  double gap = 0.0;
  std::string group_a, group_b;
  std::vector<std::string> excluded;  // groups with fewer than two scores
};

// Largest two-sample KS distance between per-group score distributions.
ParityGap parity_gap(std::span<const double> scores, std::span<const std::size_t> groups,
                     const std::vector<std::string>& group_labels);

struct ParityReport {
  std::string arm;  // e.g. "unadjusted", "mutual"
  PredictorKind kind = PredictorKind::random_forest;
  std::size_t replicates = 1;
  RocResult roc;
  GroupMetrics metrics;
  ParityGap gap;
  double threshold = 0.5;
  std::vector<double> grid;                // score grid in [0, 1]
  std::vector<std::string> grid_groups;
  std::vector<std::vector<double>> cdf;    // per group, on grid
  std::vector<std::vector<double>> density;
};

ParityReport parity_report(std::string arm, PredictorKind kind, std::size_t replicates,
                           std::span<const double> scores, std::span<const double> labels,
                           std::span<const std::size_t> groups,
                           const std::vector<std::string>& group_labels, double threshold = 0.5,
                           std::size_t grid_points = 101);

nlohmann::json to_json(const ParityReport& r);
std::string roc_csv(const std::vector<ParityReport>& reports);
std::string metrics_csv(const std::vector<ParityReport>& reports);
std::string score_grid_csv(const std::vector<ParityReport>& reports);

}  // namespace parity_forge
