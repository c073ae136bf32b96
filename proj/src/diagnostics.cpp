#include "parity_forge/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "parity_forge/empirical.hpp"
#include "parity_forge/error.hpp"
#include "parity_forge/special.hpp"

namespace parity_forge {

std::vector<std::size_t> discretize_for_test(std::span<const double> x, std::size_t max_levels) {
  if (max_levels < 2) throw Error(ErrorKind::contract, "max_levels must be at least 2");
  std::vector<double> uniq(x.begin(), x.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 2) throw Error(ErrorKind::degenerate, "cannot discretize a constant column");

  std::vector<double> cuts;
  if (uniq.size() <= max_levels) {
    cuts.assign(uniq.begin(), uniq.end() - 1);
  } else {
    Ecdf e(x);
    for (std::size_t k = 1; k < max_levels; ++k) {
      cuts.push_back(e.quantile(static_cast<double>(k) / static_cast<double>(max_levels)));
    }
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  }
  std::vector<std::size_t> raw(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    raw[i] = static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), x[i]) - cuts.begin());
  }
  // Renumber to the occupied bins.
  std::vector<std::size_t> used(cuts.size() + 1, 0);
  for (auto r : raw) used[r] = 1;
  std::vector<std::size_t> remap(used.size());
  std::size_t next = 0;
  for (std::size_t b = 0; b < used.size(); ++b) remap[b] = used[b] ? next++ : 0;
  for (auto& r : raw) r = remap[r];
  return raw;
}

ContingencyTable::ContingencyTable(std::size_t rows, std::size_t cols)
    : r_(rows), c_(cols), counts_(rows * cols, 0.0) {}

ContingencyTable ContingencyTable::from_codes(std::span<const std::size_t> a,
                                              std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::contract, "code vectors differ in length");
  std::size_t ra = a.empty() ? 0 : *std::max_element(a.begin(), a.end()) + 1;
  std::size_t rb = b.empty() ? 0 : *std::max_element(b.begin(), b.end()) + 1;
  ContingencyTable t(ra, rb);
  for (std::size_t i = 0; i < a.size(); ++i) t.add(a[i], b[i]);
  return t;
}

void ContingencyTable::add(std::size_t i, std::size_t j, double count) {
  counts_[i * c_ + j] += count;
  n_ += count;
}

ContingencyTable ContingencyTable::transposed() const {
  ContingencyTable t(c_, r_);
  for (std::size_t i = 0; i < r_; ++i)
    for (std::size_t j = 0; j < c_; ++j) t.add(j, i, at(i, j));
  return t;
}

std::vector<double> ContingencyTable::row_sums() const {
  std::vector<double> s(r_, 0.0);
  for (std::size_t i = 0; i < r_; ++i)
    for (std::size_t j = 0; j < c_; ++j) s[i] += at(i, j);
  return s;
}

std::vector<double> ContingencyTable::col_sums() const {
  std::vector<double> s(c_, 0.0);
  for (std::size_t i = 0; i < r_; ++i)
    for (std::size_t j = 0; j < c_; ++j) s[j] += at(i, j);
  return s;
}

ContingencyTable ContingencyTable::without_empty_margins() const {
  auto rs = row_sums();
  auto cs = col_sums();
  std::vector<std::size_t> ri, ci;
  for (std::size_t i = 0; i < r_; ++i)
    if (rs[i] > 0) ri.push_back(i);
  for (std::size_t j = 0; j < c_; ++j)
    if (cs[j] > 0) ci.push_back(j);
  ContingencyTable t(ri.size(), ci.size());
  for (std::size_t a = 0; a < ri.size(); ++a)
    for (std::size_t b = 0; b < ci.size(); ++b) t.add(a, b, at(ri[a], ci[b]));
  return t;
}

namespace {

ContingencyTable checked(const ContingencyTable& t, std::vector<std::string>* warnings) {
  ContingencyTable c = t.without_empty_margins();
  if ((c.rows() != t.rows() || c.cols() != t.cols()) && warnings) {
    warnings->push_back("dropped " + std::to_string(t.rows() - c.rows()) + " empty row(s) and " +
                        std::to_string(t.cols() - c.cols()) + " empty column(s)");
  }
  if (c.rows() < 2 || c.cols() < 2) {
    throw Error(ErrorKind::degenerate, "independence test needs at least two levels per variable");
  }
  return c;
}

}  // namespace

GTestResult g_test(const ContingencyTable& table) {
  GTestResult res;
  ContingencyTable t = checked(table, &res.warnings);
  auto rs = t.row_sums();
  auto cs = t.col_sums();
  const double n = t.n();
  // Cell terms are summed in sorted order so G(a, b) and G(b, a) agree exactly.
  std::vector<double> terms;
  terms.reserve(t.rows() * t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      double o = t.at(i, j);
      if (o > 0) terms.push_back(o * std::log(o * n / (rs[i] * cs[j])));
    }
  }
  std::sort(terms.begin(), terms.end());
  double g = 0.0;
  for (double v : terms) g += v;
  res.G = std::max(0.0, 2.0 * g);
  res.df = static_cast<int>((t.rows() - 1) * (t.cols() - 1));
  res.p = chi2_sf(res.G, res.df);
  return res;
}

GTestResult g_test(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  return g_test(ContingencyTable::from_codes(a, b));
}

double pearson_chi2(const ContingencyTable& table) {
  ContingencyTable t = checked(table, nullptr);
  auto rs = t.row_sums();
  auto cs = t.col_sums();
  const double n = t.n();
  double chi2 = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      double e = rs[i] * cs[j] / n;
      double d = t.at(i, j) - e;
      chi2 += d * d / e;
    }
  }
  return chi2;
}

double cramers_v(const ContingencyTable& table) {
  ContingencyTable t = checked(table, nullptr);
  double k = static_cast<double>(std::min(t.rows(), t.cols()) - 1);
  return std::min(1.0, std::sqrt(pearson_chi2(t) / (t.n() * k)));
}

double cramers_v(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  return cramers_v(ContingencyTable::from_codes(a, b));
}

std::vector<double> bh_adjust(std::span<const double> p) {
  const std::size_t m = p.size();
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::domain, "p-value outside [0,1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    std::size_t i = order[r];
    double adj = p[i] * static_cast<double>(m) / static_cast<double>(r + 1);
    running = std::min(running, adj);
    out[i] = std::min(1.0, running);
  }
  return out;
}

PitReport pit_check(const CondModel& model, std::span<const double> x, const DesignMatrix& rows,
                    std::span<const std::size_t> groups, const std::vector<std::string>& labels,
                    const DrawKey& key, std::optional<Support> support) {
  if (rows.rows() != x.size() || groups.size() != x.size()) {
    throw Error(ErrorKind::contract, "PIT inputs differ in length");
  }
  const bool atomic = support.value_or(model.support()) == Support::atomic;
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    DesignRow row = rows.row(i);
    double hi = model.cdf(x[i], row);
    if (atomic) {
      double lo = model.cdf_left(x[i], row);
      u[i] = lo + (hi - lo) * keyed_uniform(key, i);
    } else {
      u[i] = hi;
    }
  }
  std::size_t k = labels.size();
  for (auto g : groups) k = std::max(k, g + 1);
  PitReport rep;
  rep.groups.resize(k);
  for (std::size_t g = 0; g < k; ++g) {
    rep.groups[g].label = g < labels.size() ? labels[g] : std::to_string(g);
  }
  for (std::size_t i = 0; i < x.size(); ++i) rep.groups[groups[i]].pit.push_back(u[i]);
  std::erase_if(rep.groups, [](const PitGroup& g) { return g.pit.empty(); });
  for (auto& g : rep.groups) {
    g.ks = ks_uniform(g.pit);
    g.band = 1.36 / std::sqrt(static_cast<double>(g.pit.size()));
    g.low_power = g.pit.size() < 20;
  }
  return rep;
}

std::string pit_csv(const PitReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "group,pit\n";
  for (const auto& g : r.groups) {
    for (double u : g.pit) os << quote_csv_field(g.label) << ',' << u << '\n';
  }
  return os.str();
}

IndependenceReport independence_report(const Dataset& ds, const std::vector<std::string>& columns,
                                       PairScope scope, std::size_t replicate,
                                       std::size_t max_levels) {
  IndependenceReport rep;
  rep.replicate = replicate;
  std::map<std::string, std::vector<std::size_t>> codes;
  for (const auto& name : columns) {
    codes[name] = discretize_for_test(ds.column(name).values(), max_levels);
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  if (scope == PairScope::all_pairs) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      for (std::size_t j = i + 1; j < columns.size(); ++j) pairs.emplace_back(columns[i], columns[j]);
  } else {
    std::vector<std::string> prot, feat;
    for (const auto& name : columns) {
      (ds.column(name).spec().role == Role::protected_attr ? prot : feat).push_back(name);
    }
    for (const auto& a : prot) {
      for (const auto& b : prot) {
        if (a < b) pairs.emplace_back(a, b);
      }
      for (const auto& b : feat) pairs.emplace_back(a, b);
    }
  }
  std::vector<double> raw;
  for (const auto& [a, b] : pairs) {
    auto t = ContingencyTable::from_codes(codes[a], codes[b]);
    auto g = g_test(t);
    for (const auto& w : g.warnings) rep.warnings.push_back(a + " x " + b + ": " + w);
    PairTest row{a, b, g.G, g.df, g.p, g.p, cramers_v(t)};
    rep.rows.push_back(row);
    raw.push_back(g.p);
  }
  auto adj = bh_adjust(raw);
  for (std::size_t i = 0; i < adj.size(); ++i) rep.rows[i].p_bh = adj[i];
  return rep;
}

std::string report_csv(const std::vector<IndependenceReport>& reports) {
  std::ostringstream os;
  os.precision(6);
  os << "replicate,var_a,var_b,G,df,p_raw,p_bh,cramers_v\n";
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      os << r.replicate << ',' << quote_csv_field(row.a) << ',' << quote_csv_field(row.b) << ','
         << row.G << ',' << row.df << ',' << row.p_raw << ',' << row.p_bh << ',' << row.cramers_v
         << '\n';
    }
  }
  return os.str();
}

nlohmann::json report_json(const std::vector<IndependenceReport>& reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"a", row.a},
                      {"b", row.b},
                      {"G", row.G},
                      {"df", row.df},
                      {"p_raw", row.p_raw},
                      {"p_bh", row.p_bh},
                      {"cramers_v", row.cramers_v}});
    }
    out.push_back({{"replicate", r.replicate}, {"tests", rows}, {"warnings", r.warnings}});
  }
  return out;
}

}  // namespace parity_forge
