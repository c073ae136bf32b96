#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <regex>

#include "parity_forge/design.hpp"
#include "parity_forge/empirical.hpp"
#include "parity_forge/error.hpp"
#include "parity_forge/rng.hpp"

namespace pf_cli {

namespace fs = std::filesystem;

RunConfig resolve(const Overrides& o, bool config_required) {
  if (config_required && o.config.empty()) throw Error(ErrorKind::usage, "--config is required");
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.out.empty()) c.out = o.out;
  if (o.seed) set_seed(c, *o.seed);
  if (o.n) c.simulation.n = *o.n;
  if (o.m) {
    c.simulation.replicates = *o.m;
    if (c.plan) c.plan->replicates = *o.m;
  }
  if (o.mode) {
    if (!c.plan) throw Error(ErrorKind::config, "--mode given but the config has no plan");
    c.plan->mode = parse_mode(*o.mode);
  }
  if (o.model) c.predict.model = parse_predictor_kind(*o.model);
  if (o.threshold) {
    if (!(*o.threshold > 0 && *o.threshold < 1)) {
      throw Error(ErrorKind::config, "--threshold must lie in (0, 1)");
    }
    c.predict.threshold = *o.threshold;
  }
  c.threads = resolve_threads(o.threads > 0 ? o.threads : c.threads);
  apply_threads(c.threads);
  return c;
}

std::string output_dir(const RunConfig& c) {
  if (c.out.empty()) throw Error(ErrorKind::usage, "--out is required");
  return c.out;
}

namespace {

std::string stem_of(const RunConfig& c) {
  std::string s = fs::path(c.data).stem().string();
  return s.empty() ? "data" : s;
}

std::vector<std::string> feature_names(const Dataset& ds) {
  std::vector<std::string> out;
  for (const Column* c : ds.with_role(Role::feature)) out.push_back(c->name());
  return out;
}

std::vector<std::string> tested_columns(const Dataset& ds) {
  std::vector<std::string> out;
  for (const auto& c : ds.columns()) {
    if (c.spec().role == Role::protected_attr || c.spec().role == Role::feature) out.push_back(c.name());
  }
  return out;
}

ChainPlan require_plan(const RunConfig& c) {
  if (!c.plan) throw Error(ErrorKind::config, "config field 'plan': required");
  return *c.plan;
}

// Per step and protected group: KS of the recorded PIT values against
// Uniform(0, 1), per replicate, and pooled CDF/density grids.
void write_pit(RunManifest& man, const std::string& dir, const Dataset& data,
               const AdjustedEnsemble& e) {
  if (e.fits.empty() || e.fits[0].empty() || e.fits[0][0].pit.empty()) return;
  GroupCodes g = joint_groups(data.with_role(Role::protected_attr));
  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(k / 100.0);

  std::string summary = "column,group,replicate,n,ks,band,within_band,low_power\n";
  std::string curves = "column,group,u,cdf,density\n";
  for (std::size_t j = 0; j < e.fits[0].size(); ++j) {
    const std::string& col = e.fits[0][j].column;
    for (std::size_t gi = 0; gi < g.labels.size(); ++gi) {
      std::vector<double> pooled;
      for (std::size_t m = 0; m < e.fits.size(); ++m) {
        std::vector<double> v;
        const auto& pit = e.fits[m][j].pit;
        for (std::size_t i = 0; i < pit.size(); ++i) {
          if (g.codes[i] == gi) v.push_back(pit[i]);
        }
        if (v.empty()) continue;
        double ks = ks_uniform(v);
        double band = 1.36 / std::sqrt(static_cast<double>(v.size()));
        summary += quote_csv_field(col) + ',' + quote_csv_field(g.labels[gi]) + ',' +
                   std::to_string(m + 1) + ',' + std::to_string(v.size()) + ',' + format_number(ks) +
                   ',' + format_number(band) + ',' + (ks <= band ? "1" : "0") + ',' +
                   (v.size() < 20 ? "1" : "0") + '\n';
        pooled.insert(pooled.end(), v.begin(), v.end());
      }
      if (pooled.empty()) continue;
      auto cdf = cdf_on_grid(pooled, grid);
      auto dens = density_on_grid(pooled, grid);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        curves += quote_csv_field(col) + ',' + quote_csv_field(g.labels[gi]) + ',' +
                  format_number(grid[k]) + ',' + format_number(cdf[k]) + ',' + format_number(dens[k]) + '\n';
      }
    }
  }
  man.write(dir, "pit.csv", summary);
  man.write(dir, "pit_grid.csv", curves);
}

AdjustedEnsemble transform_into(const RunConfig& c, const Dataset& data, const std::string& dir,
                                RunManifest& man) {
  ChainPlan plan = require_plan(c);
  plan.record_pit = true;
  AdjustedEnsemble e = run_plan(data, plan);
  man.mark("transform");
  ExportOptions eo;
  eo.include_protected = true;
  eo.include_response = true;
  const std::string stem = stem_of(c);
  for (std::size_t m = 0; m < e.size(); ++m) {
    man.write(dir, stem + ".adjusted." + std::to_string(m + 1) + ".csv", replicate_csv(e, m, eo));
  }
  man.write(dir, "ensemble.json", ensemble_manifest(e).dump(2) + "\n");
  write_pit(man, dir, data, e);
  man.warn_all(e.warnings);
  man.mark("export");
  return e;
}

std::vector<IndependenceReport> diagnose_into(const RunConfig& c, const Dataset& data,
                                              const std::vector<Dataset>& replicates,
                                              const std::string& dir, RunManifest& man) {
  const auto cols = tested_columns(data);
  std::vector<IndependenceReport> reports;
  reports.push_back(independence_report(data, cols, c.diagnose.scope, 0, c.diagnose.max_levels));
  for (std::size_t m = 0; m < replicates.size(); ++m) {
    reports.push_back(
        independence_report(replicates[m], cols, c.diagnose.scope, m + 1, c.diagnose.max_levels));
  }
  for (const auto& r : reports) man.warn_all(r.warnings);
  man.mark("diagnose");
  man.write(dir, "independence.csv", report_csv(reports));
  man.write(dir, "independence.json", report_json(reports).dump(2) + "\n");
  return reports;
}

void write_predictions(RunManifest& man, const std::string& dir, const PredictOutcome& p) {
  std::vector<ParityReport> arms{p.unadjusted, p.adjusted};
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : arms) j.push_back(to_json(a));
  man.write(dir, "parity_report.json", j.dump(2) + "\n");
  man.write(dir, "roc.csv", roc_csv(arms));
  man.write(dir, "metrics.csv", metrics_csv(arms));
  man.write(dir, "score_grid.csv", score_grid_csv(arms));
}

Dataset load_data(const RunConfig& c) {
  Dataset ds = load_dataset(c);
  validate_roles(ds);
  return ds;
}

}  // namespace

std::vector<std::string> ensemble_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "ensemble directory '" + dir + "' not found");
  static const std::regex pattern(R"(.*\.adjusted\.(\d+)\.csv)");
  std::vector<std::pair<std::size_t, std::string>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch mt;
    std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, mt, pattern)) {
      found.emplace_back(std::stoul(mt[1].str()), entry.path().string());
    }
  }
  if (found.empty()) {
    throw Error(ErrorKind::io, "no adjusted replicates (*.adjusted.<m>.csv) in '" + dir + "'");
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

std::vector<Dataset> load_ensemble(const std::string& dir, const std::vector<ColumnSpec>& schema) {
  std::vector<Dataset> out;
  for (const auto& path : ensemble_files(dir)) {
    std::string text = read_file(path);
    auto records = read_csv_records(text.substr(0, text.find('\n')));
    std::vector<ColumnSpec> present;
    for (const auto& s : schema) {
      if (!records.empty() && std::find(records[0].begin(), records[0].end(), s.name) != records[0].end()) {
        present.push_back(s);
      }
    }
    try {
      out.push_back(parse_csv(text, present));
    } catch (const Error& e) {
      throw Error(e.kind(), path + ": " + e.what());
    }
  }
  return out;
}

GroupLabels group_labels(const Dataset& ds, const std::string& column) {
  const Column& col = ds.column(column);
  GroupLabels g;
  if (col.spec().scale == Scale::categorical) {
    g.labels = col.levels();
    for (double v : col.values()) g.codes.push_back(static_cast<std::size_t>(v));
    return g;
  }
  GroupCodes gc = joint_groups({&col});
  return {std::move(gc.codes), std::move(gc.labels)};
}

PredictOutcome predict_arms(const Dataset& data, const std::vector<Dataset>& replicates,
                            const std::string& adjusted_arm, const RunConfig& c) {
  const Column& response = data.response();
  if (response.spec().scale != Scale::binary) {
    throw Error(ErrorKind::role, "prediction needs a binary response; '" + response.name() + "' is " +
                                     std::string(to_string(response.spec().scale)));
  }
  std::vector<double> y(response.values().begin(), response.values().end());
  std::vector<std::string> features = c.predict.features.empty() ? feature_names(data) : c.predict.features;
  std::string group = c.predict.group;
  if (group.empty()) {
    auto prot = data.with_role(Role::protected_attr);
    if (prot.empty()) throw Error(ErrorKind::role, "no protected column to group by");
    group = prot[0]->name();
  }
  GroupLabels g = group_labels(data, group);

  Split split = stratified_split(y, c.seed, c.predict.train_fraction);
  std::vector<double> y_test;
  std::vector<std::size_t> g_test;
  for (auto i : split.test) {
    y_test.push_back(y[i]);
    g_test.push_back(g.codes[i]);
  }
  const auto& hp = c.predict.forest;
  const auto kind = c.predict.model;
  auto base = predict_ensemble(kind, {data}, features, y, split.train, split.test, hp, c.seed);
  auto adj = predict_ensemble(kind, replicates, features, y, split.train, split.test, hp, c.seed);
  return {parity_report("unadjusted", kind, 1, base, y_test, g_test, g.labels, c.predict.threshold),
          parity_report(adjusted_arm, kind, replicates.size(), adj, y_test, g_test, g.labels,
                        c.predict.threshold)};
}

void cmd_simulate(const Overrides& o) {
  RunConfig c = resolve(o, false);
  const std::string dir = output_dir(c);
  RunManifest man("simulate", to_json(c), c.seed);
  Dataset data = simulate_data(c.simulation);
  man.mark("simulate");
  SimStudy st = run_sim_study(data, c.simulation);
  man.mark("study");
  man.write(dir, "data.csv", to_csv(data));
  man.write(dir, "study.json", to_json(st).dump(2) + "\n");
  man.write(dir, "study_grid.csv", study_grid_csv(st));
  man.warn_all(st.warnings);
  man.save(dir);
}

void cmd_transform(const Overrides& o) {
  RunConfig c = resolve(o, true);
  const std::string dir = output_dir(c);
  RunManifest man("transform", to_json(c), c.seed);
  Dataset data = load_data(c);
  validate_plan(data, require_plan(c));
  man.mark("load");
  transform_into(c, data, dir, man);
  man.save(dir);
}

void cmd_diagnose(const Overrides& o) {
  RunConfig c = resolve(o, true);
  const std::string dir = output_dir(c);
  RunManifest man("diagnose", to_json(c), c.seed);
  Dataset data = load_data(c);
  std::vector<Dataset> reps;
  if (!o.ensemble.empty()) reps = load_ensemble(o.ensemble, c.schema);
  man.mark("load");
  diagnose_into(c, data, reps, dir, man);
  man.save(dir);
}

void cmd_predict(const Overrides& o) {
  RunConfig c = resolve(o, true);
  const std::string dir = output_dir(c);
  RunManifest man("predict", to_json(c), c.seed);
  Dataset data = load_data(c);
  std::vector<Dataset> reps;
  std::string arm = "adjusted";
  if (!o.ensemble.empty()) {
    reps = load_ensemble(o.ensemble, c.schema);
  } else {
    ChainPlan plan = require_plan(c);
    AdjustedEnsemble e = run_plan(data, plan);
    man.warn_all(e.warnings);
    reps = std::move(e.replicates);
    arm = std::string(to_string(plan.mode));
  }
  man.mark("load");
  PredictOutcome p = predict_arms(data, reps, arm, c);
  man.mark("predict");
  write_predictions(man, dir, p);
  man.save(dir);
}

void cmd_report(const Overrides& o) {
  RunConfig c = resolve(o, true);
  const std::string dir = output_dir(c);
  RunManifest man("report", to_json(c), c.seed);
  Dataset data = load_data(c);
  validate_plan(data, require_plan(c));
  man.mark("load");
  AdjustedEnsemble e = transform_into(c, data, (fs::path(dir) / "transform").string(), man);
  auto reports = diagnose_into(c, data, e.replicates, (fs::path(dir) / "diagnose").string(), man);
  PredictOutcome p = predict_arms(data, e.replicates, std::string(to_string(e.plan.mode)), c);
  man.mark("predict");
  write_predictions(man, (fs::path(dir) / "predict").string(), p);

  // Headline numbers: strongest unadjusted dependence, weakest adjusted
  // evidence, and the parity and accuracy of both predictor arms.
  double max_raw_p = 0, min_adj_p = 1, max_adj_v = 0;
  for (const auto& r : reports) {
    for (const auto& t : r.rows) {
      if (r.replicate == 0) {
        max_raw_p = std::max(max_raw_p, t.p_bh);
      } else {
        min_adj_p = std::min(min_adj_p, t.p_bh);
        max_adj_v = std::max(max_adj_v, t.cramers_v);
      }
    }
  }
  auto arm = [](const ParityReport& r) {
    return nlohmann::json{{"auc", r.roc.auc},
                          {"parity_gap", r.gap.gap},
                          {"mad_fpr", r.metrics.mad_fpr},
                          {"mad_ppv", r.metrics.mad_ppv}};
  };
  nlohmann::json summary = {{"replicates", e.size()},
                            {"mode", to_string(e.plan.mode)},
                            {"unadjusted_max_bh_p", max_raw_p},
                            {"adjusted_min_bh_p", min_adj_p},
                            {"adjusted_max_cramers_v", max_adj_v},
                            {"unadjusted", arm(p.unadjusted)},
                            {"adjusted", arm(p.adjusted)}};
  man.write(dir, "summary.json", summary.dump(2) + "\n");
  man.save(dir);
}

}  // namespace pf_cli
