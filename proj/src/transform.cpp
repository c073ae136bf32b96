#include "parity_forge/transform.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <map>
#include <set>

#include "parity_forge/design.hpp"
#include "parity_forge/error.hpp"

namespace parity_forge {

std::vector<double> make_companions(std::span<const double> values,
                                    std::span<const double> cutpoints) {
  std::vector<double> bins(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    // Number of cutpoints strictly below the value: x <= c1 lands in bin 0.
    auto it = std::lower_bound(cutpoints.begin(), cutpoints.end(), values[i]);
    bins[i] = static_cast<double>(it - cutpoints.begin());
  }
  return bins;
}

std::vector<double> resolve_cutpoints(const CompanionSpec& spec, const ColumnSpec& source,
                                      std::span<const double> adjusted) {
  std::vector<double> cuts;
  for (double c : spec.cutpoints) cuts.push_back(apply_pre_transform(source.transform, c));
  if (!spec.quantiles.empty()) {
    Ecdf e(adjusted);
    for (double p : spec.quantiles) cuts.push_back(e.quantile(p));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::mutual: return "mutual";
    case Mode::pairwise: return "pairwise";
    case Mode::none: return "none";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "mutual") return Mode::mutual;
  if (s == "pairwise") return Mode::pairwise;
  if (s == "none") return Mode::none;
  throw Error(ErrorKind::config, "unknown mode '" + std::string(s) + "' (mutual, pairwise, none)");
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::automatic: return "auto";
    case Branch::continuous: return "continuous";
    case Branch::atomic: return "atomic";
  }
  return "?";
}

Branch parse_branch(std::string_view s) {
  if (s == "auto") return Branch::automatic;
  if (s == "continuous") return Branch::continuous;
  if (s == "atomic") return Branch::atomic;
  throw Error(ErrorKind::config, "unknown branch '" + std::string(s) + "' (auto, continuous, atomic)");
}

namespace {

bool family_fits_scale(Family f, Scale s) {
  switch (f) {
    case Family::empirical_by_group: return s != Scale::categorical;
    case Family::gaussian_linear: return s == Scale::continuous || s == Scale::count;
    case Family::logistic_binary: return s == Scale::binary;
    default: return s == Scale::count;
  }
}

}  // namespace

void validate_plan(const Dataset& ds, const ChainPlan& plan) {
  if (plan.replicates == 0) throw Error(ErrorKind::config, "replicate count must be positive");
  std::set<std::string> features;
  for (const Column* c : ds.with_role(Role::feature)) features.insert(c->name());
  std::map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < plan.steps.size(); ++j) {
    const auto& st = plan.steps[j];
    const Column* col = ds.find(st.column);
    if (!col) throw Error(ErrorKind::config, "plan references unknown column '" + st.column + "'");
    if (col->spec().role != Role::feature) {
      throw Error(ErrorKind::config, "plan step '" + st.column + "' is not a feature column");
    }
    if (!position.emplace(st.column, j).second) {
      throw Error(ErrorKind::config, "column '" + st.column + "' appears twice in the plan");
    }
    if (!family_fits_scale(st.family, col->spec().scale)) {
      throw Error(ErrorKind::config, std::string(to_string(st.family)) + " cannot model " +
                                         std::string(to_string(col->spec().scale)) + " column '" +
                                         st.column + "'");
    }
    if (st.branch == Branch::atomic && st.family == Family::gaussian_linear) {
      throw Error(ErrorKind::config, "atomic branch needs a discrete model for '" + st.column + "'");
    }
    if (st.family == Family::empirical_by_group && j > 0 && plan.mode == Mode::mutual) {
      throw Error(ErrorKind::config, "empirical_by_group conditions on protected columns only; '" +
                                         st.column + "' must be the first step in mutual mode");
    }
  }
  for (const auto& f : features) {
    if (!position.count(f)) {
      throw Error(ErrorKind::config, "feature column '" + f + "' is missing from the plan ordering");
    }
  }
  auto check_companion = [&](const CompanionSpec& c, std::optional<std::size_t> step) {
    auto it = position.find(c.source);
    if (it == position.end()) {
      throw Error(ErrorKind::config, "companion source '" + c.source + "' is not a plan step");
    }
    if (step && it->second >= *step) {
      throw Error(ErrorKind::config, "companion source '" + c.source +
                                         "' must be adjusted before step '" +
                                         plan.steps[*step].column + "'");
    }
    for (std::size_t k = 1; k < c.cutpoints.size(); ++k) {
      if (!(c.cutpoints[k] > c.cutpoints[k - 1])) {
        throw Error(ErrorKind::config, "companion cutpoints for '" + c.source +
                                           "' must be strictly ascending");
      }
    }
    for (double p : c.quantiles) {
      if (!(p >= 0 && p <= 1)) {
        throw Error(ErrorKind::config, "companion quantile outside [0,1] for '" + c.source + "'");
      }
    }
  };
  for (std::size_t j = 0; j < plan.steps.size(); ++j) {
    for (const auto& c : plan.steps[j].companions) check_companion(c, j);
  }
  for (const auto& c : plan.companions) check_companion(c, std::nullopt);
}

// ---------------------------------------------------------------------------
// Univariate map

namespace {

enum class RowStatus : unsigned char { ok, nan, zero_mass, widened, failed };

struct RowKernel {
  std::span<const double> x;
  const DesignMatrix& rows;
  const CondModel& model;
  const Ecdf& target;
  const DrawKey& key;
  bool atomic;
  bool allow_zero_mass;
  double width;  // 1/n

  RowStatus operator()(std::size_t i, double& out, double& pit) const {
    DesignRow row = rows.row(i);
    double hi = model.cdf(x[i], row);
    if (std::isnan(hi)) return RowStatus::nan;
    if (!atomic) {
      pit = std::clamp(hi, 0.0, 1.0);
      out = target.quantile(pit);
      return RowStatus::ok;
    }
    double lo = model.cdf_left(x[i], row);
    if (std::isnan(lo)) return RowStatus::nan;
    RowStatus st = RowStatus::ok;
    if (!(hi > lo)) {
      if (!allow_zero_mass) return RowStatus::zero_mass;
      lo = std::min(lo, 1.0 - width);
      hi = lo + width;
      st = RowStatus::widened;
    }
    pit = std::clamp(lo + (hi - lo) * keyed_uniform(key, i), 0.0, 1.0);
    out = target.quantile(pit);
    return st;
  }
};

void rethrow_first(const std::vector<std::exception_ptr>& errs) {
  for (const auto& e : errs) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

UnivariateResult transform_univariate(std::span<const double> x, const DesignMatrix& rows,
                                      const CondModel& model, const Ecdf& target,
                                      const DrawKey& key, const UnivariateOptions& opts,
                                      Execution exec) {
  if (target.empty()) throw Error(ErrorKind::contract, "transport target is empty");
  if (rows.rows() != x.size()) {
    throw Error(ErrorKind::contract, "design rows do not match the column length");
  }
  const std::size_t n = x.size();
  Support support = opts.support.value_or(model.support());
  RowKernel kernel{x, rows, model, target, key, support == Support::atomic, opts.allow_zero_mass,
                   n ? 1.0 / static_cast<double>(n) : 1.0};

  UnivariateResult res;
  res.values.assign(n, 0.0);
  res.pit.assign(n, 0.0);
  std::vector<RowStatus> status(n, RowStatus::ok);
  std::vector<std::exception_ptr> errs;

  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) status[i] = kernel(i, res.values[i], res.pit[i]);
  } else {
    errs.resize(n);
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < sn; ++si) {
      auto i = static_cast<std::size_t>(si);
      try {
        status[i] = kernel(i, res.values[i], res.pit[i]);
      } catch (...) {
        errs[i] = std::current_exception();
        status[i] = RowStatus::failed;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    switch (status[i]) {
      case RowStatus::ok:
        break;
      case RowStatus::failed:
        rethrow_first(errs);
        break;
      case RowStatus::nan:
        throw Error(ErrorKind::propagation, "conditional CDF is NaN at row " + std::to_string(i + 1));
      case RowStatus::zero_mass:
        throw Error(ErrorKind::zero_mass, "fitted model gives zero probability to value " +
                                              std::to_string(x[i]) + " at row " +
                                              std::to_string(i + 1));
      case RowStatus::widened:
        if (res.widened < 5) {
          res.warnings.push_back("zero-mass interval widened at row " + std::to_string(i + 1) +
                                 " (value " + std::to_string(x[i]) + ")");
        }
        ++res.widened;
        break;
    }
  }
  if (res.widened > 5) {
    res.warnings.push_back(std::to_string(res.widened) + " zero-mass intervals widened in total");
  }
  return res;
}

// ---------------------------------------------------------------------------
// Chained transform

namespace {

struct PreparedStep {
  const Column* column = nullptr;
  Ecdf target;
  std::optional<CondModel> cached;
  std::optional<DesignMatrix> cached_design;
  std::optional<Support> support;
};

class ChainRunner {
 public:
  ChainRunner(const Dataset& ds, const ChainPlan& plan, Mode mode)
      : ds_(ds), plan_(plan), mode_(mode), protected_(ds.with_role(Role::protected_attr)) {
    if (protected_.empty()) {
      throw Error(ErrorKind::role, "no protected columns: nothing to adjust for");
    }
    validate_plan(ds, plan);
    steps_.resize(plan.steps.size());
    for (std::size_t j = 0; j < plan.steps.size(); ++j) {
      const auto& st = plan.steps[j];
      auto& ps = steps_[j];
      ps.column = &ds.column(st.column);
      ps.target = Ecdf(ps.column->values());
      if (st.branch == Branch::continuous) ps.support = Support::continuous;
      if (st.branch == Branch::atomic) ps.support = Support::atomic;
      if (st.branch == Branch::automatic && st.family == Family::empirical_by_group) {
        ps.support = ps.column->spec().scale == Scale::continuous ? Support::continuous
                                                                  : Support::atomic;
      }
    }
    // Fits whose design holds only protected columns are identical across
    // replicates.
    for (std::size_t j = 0; j < steps_.size(); ++j) {
      if (j == 0 || mode_ == Mode::pairwise) {
        try {
          std::map<std::string, std::vector<double>> none;
          steps_[j].cached_design = design_for(j, none);
          steps_[j].cached = fit_step(j, *steps_[j].cached_design);
        } catch (const ConvergenceError& e) {
          throw ConvergenceError(context(j, std::nullopt) + e.what(), e.last_iterate(),
                                 e.gradient_norm());
        } catch (const Error& e) {
          throw Error(e.kind(), context(j, std::nullopt) + e.what());
        }
      }
    }
  }

  void run_replicate(std::size_t m, Dataset& out, std::vector<StepRecord>& records) const {
    std::map<std::string, std::vector<double>> adjusted;
    records.clear();
    Dataset cur = ds_;
    for (std::size_t j = 0; j < steps_.size(); ++j) {
      try {
        const auto& st = plan_.steps[j];
        const auto& ps = steps_[j];
        std::optional<DesignMatrix> local_design;
        std::optional<CondModel> local_model;
        const DesignMatrix* design;
        const CondModel* model;
        if (ps.cached) {
          design = &*ps.cached_design;
          model = &*ps.cached;
        } else {
          local_design = design_for(j, adjusted);
          local_model = fit_step(j, *local_design);
          design = &*local_design;
          model = &*local_model;
        }
        DrawKey key{plan_.seed, Domain::transform,
                    static_cast<std::uint32_t>(plan_.key_replicate ? m : 0),
                    static_cast<std::uint16_t>(j)};
        UnivariateOptions uo;
        uo.allow_zero_mass = plan_.allow_zero_mass;
        uo.support = ps.support;
        auto res = transform_univariate(ps.column->values(), *design, *model, ps.target, key, uo,
                                        Execution::serial);
        StepRecord rec;
        rec.column = st.column;
        rec.model = model->to_json();
        rec.cached = ps.cached.has_value();
        rec.widened = res.widened;
        if (plan_.record_pit) rec.pit = std::move(res.pit);
        records.push_back(std::move(rec));
        cur = cur.with_values(st.column, res.values);
        adjusted[st.column] = std::move(res.values);
      } catch (const ConvergenceError& e) {
        throw ConvergenceError(context(j, m) + e.what(), e.last_iterate(), e.gradient_norm());
      } catch (const Error& e) {
        throw Error(e.kind(), context(j, m) + e.what());
      }
    }
    out = std::move(cur);
  }

 private:
  std::string context(std::size_t j, std::optional<std::size_t> m) const {
    std::string s = "step " + std::to_string(j + 1) + " ('" + plan_.steps[j].column + "')";
    if (m) s += ", replicate " + std::to_string(*m + 1);
    return s + ": ";
  }

  // Companion specs usable by step j, each paired with its design name.
  std::vector<std::pair<const CompanionSpec*, std::string>> companions_for(std::size_t j) const {
    std::vector<std::pair<const CompanionSpec*, std::string>> out;
    std::map<std::string, int> count;
    auto add = [&](const CompanionSpec& c) {
      int k = count[c.source]++;
      out.emplace_back(&c, c.source + "*" + (k ? std::to_string(k + 1) : ""));
    };
    for (const auto& c : plan_.companions) {
      for (std::size_t k = 0; k < j; ++k) {
        if (plan_.steps[k].column == c.source) add(c);
      }
    }
    for (const auto& c : plan_.steps[j].companions) add(c);
    return out;
  }

  DesignMatrix design_for(std::size_t j,
                          const std::map<std::string, std::vector<double>>& adjusted) const {
    const auto& st = plan_.steps[j];
    if (st.family == Family::empirical_by_group) return group_design(joint_groups(protected_));
    DesignBuilder b(ds_.rows());
    for (const Column* c : protected_) b.add_column(*c);
    if (mode_ == Mode::mutual) {
      std::vector<std::string> preds;
      for (std::size_t k = 0; k < j; ++k) {
        const auto& name = plan_.steps[k].column;
        b.add_numeric(name, adjusted.at(name));
        preds.push_back(name);
      }
      for (const auto& [spec, name] : companions_for(j)) {
        const auto& src = adjusted.at(spec->source);
        auto cuts = resolve_cutpoints(*spec, ds_.column(spec->source).spec(), src);
        auto bins = make_companions(src, cuts);
        b.add_categorical(name, bins);
      }
      if (st.interactions) {
        // Categorical protected columns interact through each dummy.
        std::vector<std::string> terms;
        for (const Column* c : protected_) {
          if (c->spec().scale != Scale::categorical) {
            terms.push_back(c->name());
            continue;
          }
          for (const auto& nm : b.names()) {
            if (nm.starts_with(c->name() + "=")) terms.push_back(nm);
          }
        }
        for (const auto& t : terms) {
          for (const auto& p : preds) b.add_product(t, p);
        }
      }
    }
    return b.build();
  }

  CondModel fit_step(std::size_t j, const DesignMatrix& design) const {
    const auto& st = plan_.steps[j];
    auto y = steps_[j].column->values();
    if (st.family == Family::empirical_by_group) {
      GroupCodes g = joint_groups(protected_);
      Support s = steps_[j].support.value_or(Support::atomic);
      return fit_empirical_by_group(y, g.codes, g.labels, s);
    }
    FitOptions fo;
    fo.optim = plan_.optim;
    fo.zero_inflation_covariates = st.zero_inflation_covariates;
    fo.std_errors = false;
    return fit_conditional(st.family, y, design, fo);
  }

  const Dataset& ds_;
  const ChainPlan& plan_;
  Mode mode_;
  std::vector<const Column*> protected_;
  std::vector<PreparedStep> steps_;
};

AdjustedEnsemble run_chain(const Dataset& ds, const ChainPlan& plan, Mode mode, Execution exec) {
  ChainRunner runner(ds, plan, mode);
  AdjustedEnsemble e;
  e.plan = plan;
  e.plan.mode = mode;
  const std::size_t M = plan.replicates;
  e.replicates.resize(M);
  e.fits.resize(M);
  std::vector<std::exception_ptr> errs(M);
  if (exec == Execution::serial) {
    for (std::size_t m = 0; m < M; ++m) runner.run_replicate(m, e.replicates[m], e.fits[m]);
  } else {
    const auto sM = static_cast<std::ptrdiff_t>(M);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t sm = 0; sm < sM; ++sm) {
      auto m = static_cast<std::size_t>(sm);
      try {
        runner.run_replicate(m, e.replicates[m], e.fits[m]);
      } catch (...) {
        errs[m] = std::current_exception();
      }
    }
    rethrow_first(errs);
  }
  for (std::size_t m = 0; m < M; ++m) {
    for (const auto& rec : e.fits[m]) {
      if (rec.widened) {
        e.warnings.push_back("replicate " + std::to_string(m + 1) + ", '" + rec.column + "': " +
                             std::to_string(rec.widened) + " zero-mass intervals widened");
      }
    }
  }
  return e;
}

}  // namespace

AdjustedEnsemble chain_transform(const Dataset& ds, const ChainPlan& plan, Execution exec) {
  return run_chain(ds, plan, Mode::mutual, exec);
}

AdjustedEnsemble pairwise_transform(const Dataset& ds, const ChainPlan& plan, Execution exec) {
  return run_chain(ds, plan, Mode::pairwise, exec);
}

AdjustedEnsemble run_plan(const Dataset& ds, const ChainPlan& plan, Execution exec) {
  if (plan.mode == Mode::none) {
    validate_plan(ds, plan);
    AdjustedEnsemble e;
    e.plan = plan;
    e.replicates.push_back(ds);
    e.fits.emplace_back();
    return e;
  }
  return run_chain(ds, plan, plan.mode, exec);
}

std::string replicate_csv(const AdjustedEnsemble& e, std::size_t m, const ExportOptions& opts) {
  const Dataset& d = e.replicates.at(m);
  std::vector<std::string> names;
  if (opts.include_protected) {
    for (const Column* c : d.with_role(Role::protected_attr)) names.push_back(c->name());
  }
  for (const auto& st : e.plan.steps) names.push_back(st.column);
  if (opts.include_response) names.push_back(d.response().name());
  return to_csv(d.select(names));
}

std::vector<std::string> export_ensemble(const AdjustedEnsemble& e, const std::string& dir,
                                         const std::string& stem, const ExportOptions& opts) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (std::size_t m = 0; m < e.size(); ++m) {
    auto path = (std::filesystem::path(dir) / (stem + ".adjusted." + std::to_string(m + 1) + ".csv"))
                    .string();
    write_file(path, replicate_csv(e, m, opts));
    paths.push_back(path);
  }
  return paths;
}

nlohmann::json plan_to_json(const ChainPlan& plan) {
  auto companion = [](const CompanionSpec& c) {
    return nlohmann::json{{"source", c.source}, {"cutpoints", c.cutpoints}, {"quantiles", c.quantiles}};
  };
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& st : plan.steps) {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : st.companions) cs.push_back(companion(c));
    steps.push_back({{"column", st.column},
                     {"family", to_string(st.family)},
                     {"branch", to_string(st.branch)},
                     {"companions", cs},
                     {"zero_inflation_covariates", st.zero_inflation_covariates},
                     {"interactions", st.interactions}});
  }
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : plan.companions) cs.push_back(companion(c));
  return {{"steps", steps},
          {"companions", cs},
          {"replicates", plan.replicates},
          {"seed", plan.seed},
          {"mode", to_string(plan.mode)},
          {"allow_zero_mass", plan.allow_zero_mass},
          {"key_replicate", plan.key_replicate},
          {"optimizer", {{"tol", plan.optim.tol}, {"max_iter", plan.optim.max_iter}}}};
}

nlohmann::json ensemble_manifest(const AdjustedEnsemble& e) {
  nlohmann::json fits = nlohmann::json::array();
  for (std::size_t m = 0; m < e.fits.size(); ++m) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& rec : e.fits[m]) {
      steps.push_back({{"column", rec.column},
                       {"cached", rec.cached},
                       {"zero_mass_widened", rec.widened},
                       {"model", rec.model}});
    }
    fits.push_back({{"replicate", m + 1}, {"steps", steps}});
  }
  return {{"plan", plan_to_json(e.plan)},
          {"seed", e.plan.seed},
          {"replicates", e.size()},
          {"refit", "per_replicate; protected-only designs fitted once"},
          {"fits", fits},
          {"warnings", e.warnings}};
}

}  // namespace parity_forge
