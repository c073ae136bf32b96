#pragma once

// JSON run configuration: data source and schema, transform plan, diagnostic,
// predictor and simulation settings. Unknown keys are rejected with their
// path.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parity_forge/core.hpp"
#include "parity_forge/diagnostics.hpp"
#include "parity_forge/predict.hpp"
#include "parity_forge/simulation.hpp"
#include "parity_forge/transform.hpp"

namespace parity_forge {

struct RowFilter {
  std::string column;
  std::vector<std::string> keep;  // categorical levels to retain
};

struct DiagnoseConfig {
  std::size_t max_levels = 10;
  PairScope scope = PairScope::all_pairs;
};

struct PredictConfig {
  PredictorKind model = PredictorKind::random_forest;
  std::vector<std::string> features;  // empty: every feature column
  std::string group;                  // empty: the first protected column
  double threshold = 0.5;
  double train_fraction = 0.5;
  ForestParams forest;
};

struct RunConfig {
  std::string data;  // resolved against the config file's directory
  std::vector<ColumnSpec> schema;
  std::vector<RowFilter> filters;
  std::optional<ChainPlan> plan;
  DiagnoseConfig diagnose;
  PredictConfig predict;
  SimConfig simulation;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;  // 0: runtime default
};

// `base_dir` resolves relative data paths. Syntax errors report line and
// column; field errors report the JSON path.
RunConfig parse_config(std::string_view text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

// Canonical form of the resolved configuration (sorted keys).
nlohmann::json to_json(const RunConfig& c);

// Sets the seed everywhere it is used.
void set_seed(RunConfig& c, std::uint64_t seed);

// Loads `c.data` with the schema and applies the row filters; filtered
// categorical columns keep only the retained levels.
Dataset load_dataset(const RunConfig& c);
Dataset apply_filters(const Dataset& ds, const std::vector<RowFilter>& filters);

}  // namespace parity_forge
