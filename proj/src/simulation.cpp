#include "parity_forge/simulation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "parity_forge/condmodels.hpp"
#include "parity_forge/empirical.hpp"
#include "parity_forge/error.hpp"
#include "parity_forge/rng.hpp"
#include "parity_forge/special.hpp"

namespace parity_forge {

void validate(const SimConfig& cfg) {
  if (cfg.n < 100) {
    throw Error(ErrorKind::validation,
                "simulation needs n >= 100 (got " + std::to_string(cfg.n) + ")");
  }
  if (cfg.replicates == 0) throw Error(ErrorKind::validation, "simulation needs at least one replicate");
}

double sim_x2_rate(double x1, double z) {
  return std::exp(-1.0 + 0.5 * x1 * z + 0.1 * x1 + z / 6.0);
}

Dataset simulate_data(const SimConfig& cfg, Execution exec) {
  validate(cfg);
  const std::size_t n = cfg.n;
  std::vector<double> z(n), x1(n), x2(n), y(n);
  const DrawKey key{cfg.seed, Domain::simulation, 0, 0};
  auto row = [&](std::size_t i) {
    z[i] = keyed_uniform(key, i, 0) < 0.5 ? 1.0 : 0.0;
    x1[i] = z[i] + 4.0 + keyed_normal(key, i, 1);
    double u = keyed_uniform(key.with_step(1), i, 0);
    x2[i] = static_cast<double>(poisson_from_uniform(u, sim_x2_rate(x1[i], z[i])));
    y[i] = 2.0 * x1[i] + x2[i] + z[i] + keyed_normal(key.with_step(1), i, 1);
  };
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) row(i);
  } else {
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i) row(static_cast<std::size_t>(i));
  }
  return Dataset({Column({"z", Scale::binary, Role::protected_attr}, std::move(z)),
                  Column({"x1", Scale::continuous, Role::feature}, std::move(x1)),
                  Column({"x2", Scale::count, Role::feature}, std::move(x2)),
                  Column({"y", Scale::continuous, Role::response}, std::move(y))});
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::unadjusted: return "unadjusted";
    case Regime::pairwise: return "pairwise";
    case Regime::mutual: return "mutual";
  }
  return "?";
}

ChainPlan sim_plan(const SimConfig& cfg, Mode mode) {
  ChainPlan p;
  p.steps.resize(2);
  p.steps[0].column = "x1";
  p.steps[0].family = Family::gaussian_linear;
  p.steps[1].column = "x2";
  p.steps[1].family = Family::poisson;
  p.steps[1].interactions = cfg.interaction && mode == Mode::mutual;
  p.replicates = cfg.replicates;
  p.seed = cfg.seed;
  p.mode = mode;
  // The z-only count fit puts far-tail counts at zero probability.
  p.allow_zero_mass = true;
  return p;
}

std::vector<double> least_squares_fitted(const Dataset& ds, const std::vector<std::string>& columns,
                                         std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(ds.rows());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(columns.size()) + 1);
  X.col(0).setOnes();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    auto v = ds.column(columns[k]).values();
    X.col(static_cast<Eigen::Index>(k) + 1) = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
  }
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::VectorXd beta = X.colPivHouseholderQr().solve(yv);
  Eigen::VectorXd fit = X * beta;
  return {fit.data(), fit.data() + fit.size()};
}

const RegimeResult& SimStudy::at(Regime r) const {
  for (const auto& x : regimes) {
    if (x.regime == r) return x;
  }
  throw Error(ErrorKind::lookup, "regime '" + std::string(to_string(r)) + "' not in study");
}

namespace {

double z_gap(std::span<const double> v, std::span<const double> z) {
  std::vector<double> a, b;
  for (std::size_t i = 0; i < v.size(); ++i) (z[i] == 0.0 ? a : b).push_back(v[i]);
  return ks_two_sample(a, b);
}

GroupCurves curves(std::string series, std::span<const double> v, std::span<const double> z,
                   const std::vector<double>& grid) {
  GroupCurves c{std::move(series), {}, {}};
  for (double g : {0.0, 1.0}) {
    std::vector<double> s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (z[i] == g) s.push_back(v[i]);
    }
    c.cdf.push_back(cdf_on_grid(s, grid));
    c.density.push_back(density_on_grid(s, grid));
  }
  return c;
}

}  // namespace

SimStudy run_sim_study(const Dataset& data, const SimConfig& cfg, Execution exec) {
  validate(cfg);
  SimStudy st;
  st.cfg = cfg;
  auto y = data.column("y").values();
  auto z = data.column("z").values();
  const std::vector<std::string> features{"x1", "x2"};

  st.regimes.push_back({Regime::unadjusted, least_squares_fitted(data, features, y), 0.0});
  for (Mode mode : {Mode::pairwise, Mode::mutual}) {
    AdjustedEnsemble e = run_plan(data, sim_plan(cfg, mode), exec);
    st.warnings.insert(st.warnings.end(), e.warnings.begin(), e.warnings.end());
    std::vector<double> mean(data.rows(), 0.0);
    for (const auto& rep : e.replicates) {
      auto fit = least_squares_fitted(rep, features, y);
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += fit[i];
    }
    for (double& v : mean) v /= static_cast<double>(e.size());
    st.regimes.push_back({mode == Mode::mutual ? Regime::mutual : Regime::pairwise, std::move(mean), 0.0});
  }
  for (auto& r : st.regimes) r.gap = z_gap(r.yhat, z);

  double lo = *std::min_element(y.begin(), y.end());
  double hi = *std::max_element(y.begin(), y.end());
  for (const auto& r : st.regimes) {
    auto [a, b] = std::minmax_element(r.yhat.begin(), r.yhat.end());
    lo = std::min(lo, *a);
    hi = std::max(hi, *b);
  }
  constexpr std::size_t kGrid = 201;
  for (std::size_t k = 0; k < kGrid; ++k) {
    st.grid.push_back(lo + (hi - lo) * static_cast<double>(k) / (kGrid - 1));
  }
  st.curves.push_back(curves("observed", y, z, st.grid));
  for (const auto& r : st.regimes) st.curves.push_back(curves(std::string(to_string(r.regime)), r.yhat, z, st.grid));
  return st;
}

SimStudy run_sim_study(const SimConfig& cfg, Execution exec) {
  return run_sim_study(simulate_data(cfg, exec), cfg, exec);
}

OracleGaps oracle_gaps(const SimConfig& cfg, Execution exec) {
  Dataset data = simulate_data(cfg, exec);
  auto x1 = data.column("x1").values();
  auto x2 = data.column("x2").values();
  auto z = data.column("z").values();
  auto y = data.column("y").values();
  const auto n = static_cast<Eigen::Index>(data.rows());

  DesignMatrix d1;
  d1.names = {std::string(kIntercept), "z"};
  d1.X.resize(n, 2);
  DesignMatrix d2;
  d2.names = {std::string(kIntercept), "x1:z", "x1", "z"};
  d2.X.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto u = static_cast<std::size_t>(i);
    d1.X.row(i) << 1.0, z[u];
    d2.X.row(i) << 1.0, x1[u] * z[u], x1[u], z[u];
  }
  Eigen::VectorXd p1(3), p2(4);
  p1 << 4.0, 1.0, 0.0;
  p2 << -1.0, 0.5, 0.1, 1.0 / 6.0;
  auto m1 = CondModel::parametric(Family::gaussian_linear, d1.names, p1);
  auto m2 = CondModel::parametric(Family::poisson, d2.names, p2);

  const std::vector<std::string> features{"x1", "x2"};
  OracleGaps g;
  g.unadjusted = z_gap(least_squares_fitted(data, features, y), z);

  std::vector<double> mean(data.rows(), 0.0);
  for (std::size_t m = 0; m < cfg.replicates; ++m) {
    DrawKey key{cfg.seed, Domain::transform, static_cast<std::uint32_t>(m), 0};
    auto t1 = transform_univariate(x1, d1, m1, Ecdf(x1), key, {}, exec);
    auto t2 = transform_univariate(x2, d2, m2, Ecdf(x2), key.with_step(1), {}, exec);
    Dataset adj = data.with_values("x1", std::move(t1.values)).with_values("x2", std::move(t2.values));
    auto fit = least_squares_fitted(adj, features, y);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += fit[i];
  }
  g.mutual = z_gap(mean, z);
  return g;
}

nlohmann::json to_json(const SimStudy& s) {
  nlohmann::json regimes = nlohmann::json::object();
  for (const auto& r : s.regimes) regimes[std::string(to_string(r.regime))] = {{"gap", r.gap}};
  return {{"n", s.cfg.n},
          {"seed", s.cfg.seed},
          {"replicates", s.cfg.replicates},
          {"interaction", s.cfg.interaction},
          {"least_squares_intercept", true},
          {"regimes", regimes},
          {"warnings", s.warnings}};
}

std::string study_grid_csv(const SimStudy& s) {
  std::string out = "series,z,value,cdf,density\n";
  for (const auto& c : s.curves) {
    for (std::size_t g = 0; g < c.cdf.size(); ++g) {
      for (std::size_t k = 0; k < s.grid.size(); ++k) {
        out += c.series + ',' + std::to_string(g) + ',' + format_number(s.grid[k]) + ',' +
               format_number(c.cdf[g][k]) + ',' + format_number(c.density[g][k]) + '\n';
      }
    }
  }
  return out;
}

}  // namespace parity_forge
