#pragma once

// Synthetic two-covariate study: z ~ Bern(0.5), x1 | z ~ N(z + 4, 1),
// x2 | x1, z ~ Pois(exp(-1 + x1 z / 2 + x1 / 10 + z / 6)), y ~ N(2 x1 + x2 + z, 1),
// and the comparison of least-squares fitted values under no, pairwise and
// mutual adjustment.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "parity_forge/core.hpp"
#include "parity_forge/transform.hpp"

namespace parity_forge {

struct SimConfig {
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::size_t replicates = 10;
  // Adds the z x x1 product to the x2 design in the mutual regime.
  bool interaction = false;
};

void validate(const SimConfig& cfg);

// Columns z (protected, binary), x1 (continuous), x2 (count), y (continuous
// response). Draws are keyed by (seed, row, column).
Dataset simulate_data(const SimConfig& cfg, Execution exec = Execution::parallel);

// Mean of x2 given x1 and z under the generating model.
double sim_x2_rate(double x1, double z);

enum class Regime { unadjusted, pairwise, mutual };
std::string_view to_string(Regime r);

// Transform plan for the adjusted regimes: x1 gaussian on z, then x2 poisson.
ChainPlan sim_plan(const SimConfig& cfg, Mode mode);

// Least-squares fitted values of y on an intercept plus the named columns.
std::vector<double> least_squares_fitted(const Dataset& ds, const std::vector<std::string>& columns,
                                         std::span<const double> y);

struct GroupCurves {
  std::string series;  // regime name or "observed"
  std::vector<std::vector<double>> cdf;      // [z][grid]
  std::vector<std::vector<double>> density;  // [z][grid]
};

struct RegimeResult {
  Regime regime = Regime::unadjusted;
  std::vector<double> yhat;  // averaged over replicates
  double gap = 0.0;          // KS distance of yhat between z groups
};

struct SimStudy {
  SimConfig cfg;
  std::vector<RegimeResult> regimes;
  std::vector<double> grid;
  std::vector<GroupCurves> curves;  // observed y first, then each regime
  std::vector<std::string> warnings;

  const RegimeResult& at(Regime r) const;
};

SimStudy run_sim_study(const SimConfig& cfg, Execution exec = Execution::parallel);
SimStudy run_sim_study(const Dataset& data, const SimConfig& cfg,
                       Execution exec = Execution::parallel);

// Mutual adjustment with the generating conditional CDFs in place of fitted
// ones; returns {unadjusted gap, mutual gap}.
struct OracleGaps {
  double unadjusted = 0.0;
  double mutual = 0.0;
};
OracleGaps oracle_gaps(const SimConfig& cfg, Execution exec = Execution::parallel);

nlohmann::json to_json(const SimStudy& s);
// Long format: series,z,value,cdf,density.
std::string study_grid_csv(const SimStudy& s);

}  // namespace parity_forge
