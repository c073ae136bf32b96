#pragma once

// Subcommand implementations behind the parity-forge executable. Each writes
// its outputs plus manifest.json into the output directory and throws
// parity_forge::Error on failure.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parity_forge/config.hpp"
#include "parity_forge/manifest.hpp"

namespace pf_cli {

using namespace parity_forge;

struct Overrides {
  std::string config;
  std::string out;
  std::string ensemble;  // directory of adjusted replicates
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> m;
  std::optional<std::string> mode;
  std::optional<std::string> model;
  std::optional<double> threshold;
  std::optional<std::size_t> n;
  int threads = 0;
};

// Loads the config (when given) and applies command-line overrides.
RunConfig resolve(const Overrides& o, bool config_required);
std::string output_dir(const RunConfig& c);

void cmd_simulate(const Overrides& o);
void cmd_transform(const Overrides& o);
void cmd_diagnose(const Overrides& o);
void cmd_predict(const Overrides& o);
// transform, diagnose and predict into out/{transform,diagnose,predict} plus
// summary.json.
void cmd_report(const Overrides& o);

// Adjusted replicate files `<stem>.adjusted.<m>.csv` in dir, ordered by m.
std::vector<std::string> ensemble_files(const std::string& dir);
std::vector<Dataset> load_ensemble(const std::string& dir, const std::vector<ColumnSpec>& schema);

struct GroupLabels {
  std::vector<std::size_t> codes;
  std::vector<std::string> labels;
};
GroupLabels group_labels(const Dataset& ds, const std::string& column);

struct PredictOutcome {
  ParityReport unadjusted;
  ParityReport adjusted;
};
// Trains on the unadjusted data and on every replicate over one shared split.
PredictOutcome predict_arms(const Dataset& data, const std::vector<Dataset>& replicates,
                            const std::string& adjusted_arm, const RunConfig& c);

}  // namespace pf_cli
