#pragma once

#include <functional>

#include <Eigen/Core>

namespace parity_forge {

struct OptimOptions {
  double tol = 1e-8;   // on the Euclidean norm of the gradient
  int max_iter = 200;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Returns f(x); fills *grad when non-null.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

// BFGS on the inverse Hessian with Armijo backtracking. Never throws on
// non-convergence; callers inspect `converged`.
OptimResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const OptimOptions& opts);

// Central-difference Hessian of an analytic gradient.
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-5);

}  // namespace parity_forge
