#pragma once

// Independence checks: G-tests with Benjamini-Hochberg adjustment, Cramer's
// V, randomized PIT calibration and the discretization they rely on.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "parity_forge/condmodels.hpp"
#include "parity_forge/core.hpp"
#include "parity_forge/rng.hpp"

namespace parity_forge {

// Codes 0..k-1. Columns with at most `max_levels` distinct values pass
// through (coded by rank); others are cut at the 1/max_levels quantiles with
// duplicate cutpoints collapsed.
std::vector<std::size_t> discretize_for_test(std::span<const double> x, std::size_t max_levels = 10);

class ContingencyTable {
 public:
  ContingencyTable(std::size_t rows, std::size_t cols);
  static ContingencyTable from_codes(std::span<const std::size_t> a, std::span<const std::size_t> b);

  std::size_t rows() const noexcept { return r_; }
  std::size_t cols() const noexcept { return c_; }
  double n() const noexcept { return n_; }
  double at(std::size_t i, std::size_t j) const { return counts_[i * c_ + j]; }
  void add(std::size_t i, std::size_t j, double count = 1.0);
  ContingencyTable transposed() const;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  // Copy without all-zero rows and columns.
  ContingencyTable without_empty_margins() const;

 private:
  std::size_t r_, c_;
  std::vector<double> counts_;
  double n_ = 0.0;
};

struct GTestResult {
  double G = 0.0;
  int df = 0;
  double p = 1.0;
  std::vector<std::string> warnings;
};

// Likelihood-ratio test of independence; empty rows/columns are dropped with
// a warning.
GTestResult g_test(const ContingencyTable& t);
GTestResult g_test(std::span<const std::size_t> a, std::span<const std::size_t> b);

// Pearson chi-square statistic.
double pearson_chi2(const ContingencyTable& t);

// Bias-uncorrected Cramer's V from Pearson chi-square.
double cramers_v(const ContingencyTable& t);
double cramers_v(std::span<const std::size_t> a, std::span<const std::size_t> b);

// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> bh_adjust(std::span<const double> p);

struct PitGroup {
  std::string label;
  std::vector<double> pit;
  double ks = 0.0;
  double band = 0.0;  // 1.36 / sqrt(n)
  bool low_power = false;  // fewer than 20 observations
  bool within_band() const { return ks <= band; }
};

struct PitReport {
  std::vector<PitGroup> groups;
};

// Probability integral transform of each observation under the model,
// randomized within [F(x-), F(x)] for atomic support, and its KS distance to
// Uniform(0, 1) within each group.
PitReport pit_check(const CondModel& model, std::span<const double> x, const DesignMatrix& rows,
                    std::span<const std::size_t> groups, const std::vector<std::string>& labels,
                    const DrawKey& key, std::optional<Support> support = std::nullopt);

std::string pit_csv(const PitReport& r);

struct PairTest {
  std::string a, b;
  double G = 0.0;
  int df = 0;
  double p_raw = 1.0;
  double p_bh = 1.0;
  double cramers_v = 0.0;
};

struct IndependenceReport {
  std::size_t replicate = 0;  // 0 for unadjusted data
  std::vector<PairTest> rows;
  std::vector<std::string> warnings;
};

enum class PairScope { protected_vs_features, all_pairs };

// Tests every (protected, feature) pair, or every pair of the listed columns,
// with BH adjustment across the report.
IndependenceReport independence_report(const Dataset& ds, const std::vector<std::string>& columns,
                                       PairScope scope, std::size_t replicate = 0,
                                       std::size_t max_levels = 10);

std::string report_csv(const std::vector<IndependenceReport>& reports);
nlohmann::json report_json(const std::vector<IndependenceReport>& reports);

}  // namespace parity_forge
