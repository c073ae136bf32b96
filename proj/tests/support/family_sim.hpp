#pragma once

// Draws responses from a parametric conditional family with known
// coefficients, for recovery and calibration checks.

#include <cmath>
#include <cstdint>
#include <vector>

#include "parity_forge/condmodels.hpp"
#include "parity_forge/rng.hpp"
#include "parity_forge/special.hpp"

namespace pf_test {

using namespace parity_forge;

struct SimulatedFit {
  DesignMatrix design;
  std::vector<double> y;
  std::vector<std::size_t> group;  // binary covariate, for grouped checks
  Eigen::VectorXd truth;
};

// Design [1, z, w] with z ~ Bern(0.5), w ~ N(0, 1).
inline DesignMatrix make_design(std::size_t n, std::uint64_t seed, std::vector<std::size_t>* group) {
  DesignMatrix d;
  d.names = {std::string(kIntercept), "z", "w"};
  d.X.resize(static_cast<Eigen::Index>(n), 3);
  DrawKey k{seed, Domain::test, 0, 1};
  if (group) group->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = static_cast<Eigen::Index>(i);
    double z = keyed_uniform(k, i, 0) < 0.5 ? 1.0 : 0.0;
    d.X(r, 0) = 1.0;
    d.X(r, 1) = z;
    d.X(r, 2) = keyed_normal(k, i, 1);
    if (group) (*group)[i] = static_cast<std::size_t>(z);
  }
  return d;
}

inline Eigen::VectorXd default_truth(Family f) {
  Eigen::VectorXd t;
  switch (f) {
    case Family::gaussian_linear: t.resize(4); t << 1.0, 0.8, -0.5, std::log(1.3); break;
    case Family::logistic_binary: t.resize(3); t << -0.4, 0.9, 0.6; break;
    case Family::poisson: t.resize(3); t << 0.5, 0.4, 0.3; break;
    case Family::zero_inflated_poisson: t.resize(6); t << -0.3, 0.5, 0.2, 0.9, 0.3, 0.25; break;
    case Family::zero_inflated_negbin:
      t.resize(7); t << -0.5, 0.4, 0.3, 1.0, 0.3, 0.25, std::log(1.5); break;
    default: break;
  }
  return t;
}

inline double draw(const CondModel& m, DesignRow row, double u1, double u2) {
  switch (m.family()) {
    case Family::gaussian_linear:
      return m.component_mean(row) + m.residual_scale() * normal_quantile(u1);
    case Family::logistic_binary:
      return u1 < m.component_mean(row) ? 1.0 : 0.0;
    case Family::poisson:
      return static_cast<double>(poisson_from_uniform(u1, m.component_mean(row)));
    case Family::zero_inflated_poisson:
      if (u2 < m.zero_probability(row)) return 0.0;
      return static_cast<double>(poisson_from_uniform(u1, m.component_mean(row)));
    case Family::zero_inflated_negbin:
      if (u2 < m.zero_probability(row)) return 0.0;
      return static_cast<double>(negbin_from_uniform(u1, m.component_mean(row), m.dispersion()));
    default:
      return 0.0;
  }
}

inline SimulatedFit simulate_family(Family f, std::size_t n, std::uint64_t seed,
                                    Eigen::VectorXd truth = {}) {
  SimulatedFit s;
  s.design = make_design(n, seed, &s.group);
  s.truth = truth.size() ? truth : default_truth(f);
  CondModel m = CondModel::parametric(f, s.design.names, s.truth);
  DrawKey k{seed, Domain::test, 0, 2};
  s.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.y[i] = draw(m, s.design.row(i), keyed_uniform(k, i, 0), keyed_uniform(k, i, 1));
  }
  return s;
}

}  // namespace pf_test
