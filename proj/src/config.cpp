#include "parity_forge/config.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "parity_forge/error.hpp"

namespace parity_forge {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::config, "config field '" + path + "': " + what);
}

// Object view that checks types and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& get(const std::string& key) {
    if (!has(key)) fail(at(key), "required");
    return j_.at(key);
  }

  std::string str(const std::string& key, std::string def = {}) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  double num(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  std::uint64_t uint(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(at(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  bool flag(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }
  std::vector<double> nums(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    for (const auto& e : v) {
      if (!e.is_number()) fail(at(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<std::string> strs(const std::string& key) {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array of strings");
    for (const auto& e : v) {
      if (!e.is_string()) fail(at(key), "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  template <class Parse>
  auto parsed(const std::string& key, const std::string& def, Parse parse) {
    std::string s = str(key, def);
    try {
      return parse(s);
    } catch (const Error& e) {
      fail(at(key), e.what());
    }
  }

  void done() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(at(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

CompanionSpec parse_companion(const json& j, const std::string& path) {
  Fields f(j, path);
  CompanionSpec c;
  c.source = f.str("source");
  if (c.source.empty()) fail(f.at("source"), "required");
  c.cutpoints = f.nums("cutpoints");
  c.quantiles = f.nums("quantiles");
  f.done();
  return c;
}

std::vector<CompanionSpec> parse_companions(Fields& f, const std::string& key) {
  std::vector<CompanionSpec> out;
  if (!f.has(key)) return out;
  const json& arr = f.get(key);
  if (!arr.is_array()) fail(f.at(key), "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_companion(arr[i], index_path(f.at(key), i)));
  return out;
}

ChainPlan parse_plan(const json& j) {
  Fields f(j, "plan");
  ChainPlan p;
  p.mode = f.parsed("mode", "mutual", parse_mode);
  p.replicates = f.uint("replicates", p.replicates);
  p.allow_zero_mass = f.flag("allow_zero_mass", p.allow_zero_mass);
  p.key_replicate = f.flag("key_replicate", p.key_replicate);
  p.record_pit = f.flag("record_pit", p.record_pit);
  p.companions = parse_companions(f, "companions");
  if (f.has("optimizer")) {
    Fields o(f.get("optimizer"), "plan.optimizer");
    p.optim.tol = o.num("tol", p.optim.tol);
    p.optim.max_iter = static_cast<int>(o.uint("max_iter", static_cast<std::uint64_t>(p.optim.max_iter)));
    o.done();
  }
  const json& steps = f.get("steps");
  if (!steps.is_array() || steps.empty()) fail("plan.steps", "expected a non-empty array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Fields s(steps[i], index_path("plan.steps", i));
    StepSpec st;
    st.column = s.str("column");
    if (st.column.empty()) fail(s.at("column"), "required");
    if (!s.has("family")) fail(s.at("family"), "required");
    st.family = s.parsed("family", "", parse_family);
    st.branch = s.parsed("branch", "auto", parse_branch);
    st.companions = parse_companions(s, "companions");
    st.zero_inflation_covariates = s.flag("zero_inflation_covariates", st.zero_inflation_covariates);
    st.interactions = s.flag("interactions", st.interactions);
    s.done();
    p.steps.push_back(std::move(st));
  }
  f.done();
  return p;
}

PairScope parse_scope(std::string_view s) {
  if (s == "all_pairs") return PairScope::all_pairs;
  if (s == "protected_vs_features") return PairScope::protected_vs_features;
  throw Error(ErrorKind::config, "unknown scope '" + std::string(s) +
                                     "' (all_pairs, protected_vs_features)");
}

std::string_view to_string(PairScope s) {
  return s == PairScope::all_pairs ? "all_pairs" : "protected_vs_features";
}

std::string position(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(ErrorKind::config, "config is not valid JSON at " + position(text, byte));
  }
  Fields f(root, "");
  RunConfig c;
  std::string data = f.str("data");
  if (!data.empty()) {
    std::filesystem::path p(data);
    c.data = p.is_absolute() ? data : (std::filesystem::path(base_dir) / p).lexically_normal().string();
  }
  if (f.has("schema")) {
    const json& arr = f.get("schema");
    if (!arr.is_array()) fail("schema", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields s(arr[i], index_path("schema", i));
      ColumnSpec cs;
      cs.name = s.str("name");
      if (cs.name.empty()) fail(s.at("name"), "required");
      cs.scale = s.parsed("scale", "continuous", parse_scale);
      cs.role = s.parsed("role", "feature", parse_role);
      cs.transform = s.parsed("transform", "none", parse_pre_transform);
      s.done();
      c.schema.push_back(std::move(cs));
    }
  }
  if (f.has("filters")) {
    const json& arr = f.get("filters");
    if (!arr.is_array()) fail("filters", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields s(arr[i], index_path("filters", i));
      RowFilter rf{s.str("column"), s.strs("keep")};
      if (rf.column.empty()) fail(s.at("column"), "required");
      s.done();
      c.filters.push_back(std::move(rf));
    }
  }
  if (f.has("plan")) c.plan = parse_plan(f.get("plan"));
  if (f.has("diagnose")) {
    Fields d(f.get("diagnose"), "diagnose");
    c.diagnose.max_levels = d.uint("max_levels", c.diagnose.max_levels);
    if (c.diagnose.max_levels < 2) fail("diagnose.max_levels", "must be at least 2");
    c.diagnose.scope = d.parsed("scope", "all_pairs", parse_scope);
    d.done();
  }
  if (f.has("predict")) {
    Fields d(f.get("predict"), "predict");
    auto& p = c.predict;
    p.model = d.parsed("model", "rf", parse_predictor_kind);
    p.features = d.strs("features");
    p.group = d.str("group");
    p.threshold = d.num("threshold", p.threshold);
    p.train_fraction = d.num("train_fraction", p.train_fraction);
    if (!(p.threshold > 0 && p.threshold < 1)) fail("predict.threshold", "must lie in (0, 1)");
    if (!(p.train_fraction > 0 && p.train_fraction < 1)) fail("predict.train_fraction", "must lie in (0, 1)");
    if (d.has("forest")) {
      Fields t(d.get("forest"), "predict.forest");
      p.forest.trees = t.uint("trees", p.forest.trees);
      p.forest.mtry = t.uint("mtry", p.forest.mtry);
      p.forest.min_leaf = t.uint("min_leaf", p.forest.min_leaf);
      p.forest.max_depth = t.uint("max_depth", p.forest.max_depth);
      if (p.forest.trees == 0) fail("predict.forest.trees", "must be positive");
      if (p.forest.min_leaf == 0) fail("predict.forest.min_leaf", "must be positive");
      t.done();
    }
    d.done();
  }
  if (f.has("simulation")) {
    Fields s(f.get("simulation"), "simulation");
    c.simulation.n = s.uint("n", c.simulation.n);
    c.simulation.replicates = s.uint("replicates", c.simulation.replicates);
    c.simulation.interaction = s.flag("interaction", c.simulation.interaction);
    s.done();
  }
  c.out = f.str("out");
  c.threads = static_cast<int>(f.uint("threads", 0));
  set_seed(c, f.uint("seed", 0));
  f.done();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::string text = read_file(path);
  std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config(text, base.empty() ? "." : base);
}

void set_seed(RunConfig& c, std::uint64_t seed) {
  c.seed = seed;
  c.simulation.seed = seed;
  if (c.plan) c.plan->seed = seed;
}

json to_json(const RunConfig& c) {
  json schema = json::array();
  for (const auto& s : c.schema) {
    schema.push_back({{"name", s.name},
                      {"scale", to_string(s.scale)},
                      {"role", to_string(s.role)},
                      {"transform", to_string(s.transform)}});
  }
  json filters = json::array();
  for (const auto& rf : c.filters) filters.push_back({{"column", rf.column}, {"keep", rf.keep}});
  const auto& p = c.predict;
  json j = {{"data", c.data},
            {"schema", schema},
            {"filters", filters},
            {"diagnose", {{"max_levels", c.diagnose.max_levels}, {"scope", to_string(c.diagnose.scope)}}},
            {"predict",
             {{"model", to_string(p.model)},
              {"features", p.features},
              {"group", p.group},
              {"threshold", p.threshold},
              {"train_fraction", p.train_fraction},
              {"forest",
               {{"trees", p.forest.trees},
                {"mtry", p.forest.mtry},
                {"min_leaf", p.forest.min_leaf},
                {"max_depth", p.forest.max_depth}}}}},
            {"simulation",
             {{"n", c.simulation.n},
              {"replicates", c.simulation.replicates},
              {"interaction", c.simulation.interaction}}},
            {"seed", c.seed},
            {"out", c.out}};
  if (c.plan) j["plan"] = plan_to_json(*c.plan);
  return j;
}

Dataset apply_filters(const Dataset& ds, const std::vector<RowFilter>& filters) {
  Dataset cur = ds;
  for (const auto& rf : filters) {
    const Column* col = cur.find(rf.column);
    if (!col) throw Error(ErrorKind::config, "filter names unknown column '" + rf.column + "'");
    if (col->spec().scale != Scale::categorical) {
      throw Error(ErrorKind::config, "filter column '" + rf.column + "' is not categorical");
    }
    std::vector<std::string> keep = rf.keep;
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    std::vector<long> remap(col->levels().size(), -1);
    for (std::size_t l = 0; l < col->levels().size(); ++l) {
      auto it = std::lower_bound(keep.begin(), keep.end(), col->levels()[l]);
      if (it != keep.end() && *it == col->levels()[l]) remap[l] = it - keep.begin();
    }
    std::vector<std::size_t> rows;
    std::vector<double> codes;
    for (std::size_t i = 0; i < cur.rows(); ++i) {
      long r = remap[static_cast<std::size_t>(col->values()[i])];
      if (r >= 0) {
        rows.push_back(i);
        codes.push_back(static_cast<double>(r));
      }
    }
    if (rows.empty()) throw Error(ErrorKind::validation, "filter on '" + rf.column + "' keeps no rows");
    Dataset kept = cur.take_rows(rows);
    std::vector<Column> cols;
    for (const auto& c : kept.columns()) {
      if (c.name() == rf.column) {
        cols.emplace_back(c.spec(), codes, keep);
      } else {
        cols.push_back(c);
      }
    }
    cur = Dataset(std::move(cols));
  }
  return cur;
}

Dataset load_dataset(const RunConfig& c) {
  if (c.data.empty()) throw Error(ErrorKind::config, "config field 'data': required");
  if (c.schema.empty()) throw Error(ErrorKind::config, "config field 'schema': required");
  return apply_filters(load_csv(c.data, c.schema), c.filters);
}

}  // namespace parity_forge
