#include "parity_forge/optim.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace parity_forge {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

OptimResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const OptimOptions& opts) {
  const Eigen::Index p = x0.size();
  OptimResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(p);
  double fx = f(res.x, &g);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(p, p);
  bool scaled = false;

  Eigen::VectorXd x_new(p), g_new(p);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    res.gradient_norm = g.norm();
    if (res.gradient_norm < opts.tol) {
      res.converged = true;
      break;
    }
    res.iterations = iter + 1;

    Eigen::VectorXd dir = -H * g;
    double slope = dir.dot(g);
    if (!(slope < 0)) {
      H.setIdentity();
      scaled = false;
      dir = -g;
      slope = -g.squaredNorm();
    }

    // Armijo backtracking. Near the optimum, objective differences drop below
    // rounding, so a step that leaves f unchanged but shrinks the gradient is
    // also accepted.
    double alpha = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      x_new = res.x + alpha * dir;
      f_new = f(x_new, &g_new);
      if (finite(f_new) && g_new.allFinite()) {
        bool armijo = f_new <= fx + 1e-4 * alpha * slope;
        bool flat = std::fabs(f_new - fx) <= 1e-13 * (1.0 + std::fabs(fx)) &&
                    g_new.norm() < res.gradient_norm;
        if (armijo || flat) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (scaled) {
        // Retry once from a steepest-descent direction.
        H.setIdentity();
        scaled = false;
        continue;
      }
      break;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      double rho = 1.0 / sy;
      Eigen::VectorXd Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) -
           rho * (Hy * s.transpose() + s * Hy.transpose());
    }
    res.x = x_new;
    fx = f_new;
    g = g_new;
  }
  res.value = fx;
  res.gradient_norm = g.norm();
  if (res.gradient_norm < opts.tol) res.converged = true;
  return res;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index p = x.size();
  Eigen::MatrixXd hess(p, p);
  Eigen::VectorXd gp(p), gm(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double h = rel_step * std::max(1.0, std::fabs(x[j]));
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    f(xp, &gp);
    f(xm, &gm);
    hess.col(j) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace parity_forge
