#pragma once

// Quantile-matching transport of each feature onto its marginal, conditional
// on the protected columns and (for mutual independence) on the features
// already adjusted.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "parity_forge/condmodels.hpp"
#include "parity_forge/core.hpp"
#include "parity_forge/empirical.hpp"
#include "parity_forge/rng.hpp"

namespace parity_forge {

// Discretized copy of an adjusted column used as extra design input.
struct CompanionSpec {
  std::string source;
  // Fixed cutpoints on the file scale of `source` (pre-transform applied when
  // resolved).
  std::vector<double> cutpoints;
  // Probabilities p for data-driven cutpoints Q(p, adjusted source).
  std::vector<double> quantiles;
};

// Bin index per value; bins are (-inf, c1], (c1, c2], ..., (ck, inf).
std::vector<double> make_companions(std::span<const double> values,
                                    std::span<const double> cutpoints);

// Sorted, de-duplicated cutpoints for one replicate's adjusted column.
std::vector<double> resolve_cutpoints(const CompanionSpec& spec, const ColumnSpec& source,
                                      std::span<const double> adjusted);

enum class Mode { mutual, pairwise, none };
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

// Randomization branch of the univariate map. `automatic` follows the fitted
// model (empirical models follow the column scale).
enum class Branch { automatic, continuous, atomic };
std::string_view to_string(Branch b);
Branch parse_branch(std::string_view s);

struct StepSpec {
  std::string column;
  Family family = Family::gaussian_linear;
  Branch branch = Branch::automatic;
  std::vector<CompanionSpec> companions;
  bool zero_inflation_covariates = true;
  // Adds protected x adjusted-predecessor products to the design.
  bool interactions = false;
};

struct ChainPlan {
  std::vector<StepSpec> steps;
  // Companions offered to every step after their source.
  std::vector<CompanionSpec> companions;
  std::size_t replicates = 50;
  std::uint64_t seed = 0;
  Mode mode = Mode::mutual;
  // Widen zero-mass intervals to width 1/n instead of failing.
  bool allow_zero_mass = false;
  // When false every replicate reuses replicate 0's draws.
  bool key_replicate = true;
  // Keep each step's randomized PIT values in the fit records.
  bool record_pit = false;
  OptimOptions optim;
};

// Checks ordering, families and companion references against the dataset.
void validate_plan(const Dataset& ds, const ChainPlan& plan);

enum class Execution { serial, parallel };

struct UnivariateOptions {
  bool allow_zero_mass = false;
  // Override of the model's support; nullopt follows the model.
  std::optional<Support> support;
};

struct UnivariateResult {
  std::vector<double> values;
  std::vector<double> pit;  // the (randomized) F(x | row) each value was transported from
  std::size_t widened = 0;  // zero-mass intervals widened
  std::vector<std::string> warnings;
};

// Univariate transport x_i -> Q_target(F(x_i | row_i)), randomized within
// [F(x-), F(x)] for atomic support. Draws are keyed by (key, i).
UnivariateResult transform_univariate(std::span<const double> x, const DesignMatrix& rows,
                                      const CondModel& model, const Ecdf& target,
                                      const DrawKey& key, const UnivariateOptions& opts = {},
                                      Execution exec = Execution::parallel);

struct StepRecord {
  std::string column;
  nlohmann::json model;
  bool cached = false;
  std::size_t widened = 0;
  std::vector<double> pit;  // filled when the plan records PIT values
};

struct AdjustedEnsemble {
  ChainPlan plan;
  // Full datasets: features replaced by adjusted values, protected, response
  // and excluded columns untouched.
  std::vector<Dataset> replicates;
  // fits[m][j] for replicate m, step j.
  std::vector<std::vector<StepRecord>> fits;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return replicates.size(); }
};

AdjustedEnsemble chain_transform(const Dataset& ds, const ChainPlan& plan,
                                 Execution exec = Execution::parallel);
AdjustedEnsemble pairwise_transform(const Dataset& ds, const ChainPlan& plan,
                                    Execution exec = Execution::parallel);
// Dispatches on plan.mode; `none` yields one unmodified replicate.
AdjustedEnsemble run_plan(const Dataset& ds, const ChainPlan& plan,
                          Execution exec = Execution::parallel);

struct ExportOptions {
  bool include_response = false;
  bool include_protected = false;
};

// Adjusted columns of one replicate in plan order, as CSV text.
std::string replicate_csv(const AdjustedEnsemble& e, std::size_t m, const ExportOptions& opts = {});

// Writes <stem>.adjusted.<m>.csv for m = 1..M into `dir`; returns the paths.
std::vector<std::string> export_ensemble(const AdjustedEnsemble& e, const std::string& dir,
                                         const std::string& stem, const ExportOptions& opts = {});

nlohmann::json plan_to_json(const ChainPlan& plan);
nlohmann::json ensemble_manifest(const AdjustedEnsemble& e);

}  // namespace parity_forge
