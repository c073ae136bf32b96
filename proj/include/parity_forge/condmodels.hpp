#pragma once

// Conditional distribution models F(x | covariates) with a common CDF
// contract. Parametric families are fitted by maximum likelihood.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "parity_forge/empirical.hpp"
#include "parity_forge/optim.hpp"

namespace parity_forge {

enum class Family {
  empirical_by_group,
  gaussian_linear,
  logistic_binary,
  poisson,
  zero_inflated_poisson,
  zero_inflated_negbin,
};

std::string_view to_string(Family f);
Family parse_family(std::string_view s);

// Continuous models map observations deterministically; atomic ones need the
// randomized transform.
enum class Support { continuous, atomic };

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DesignRow = std::span<const double>;

inline constexpr std::string_view kIntercept = "(intercept)";

struct DesignMatrix {
  std::vector<std::string> names;
  RowMatrix X;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
  DesignRow row(std::size_t i) const {
    return {X.data() + i * static_cast<std::size_t>(X.cols()), static_cast<std::size_t>(X.cols())};
  }
};

// Intercept-only design with n rows.
DesignMatrix intercept_design(std::size_t n);

struct FitOptions {
  OptimOptions optim;
  // Zero-inflation logit uses the full design when true, intercept only
  // otherwise.
  bool zero_inflation_covariates = true;
  // Logistic coefficient norm above which the fit is declared separated.
  double separation_norm = 1e3;
  bool std_errors = true;
};

struct FitDiagnostics {
  double log_likelihood = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = true;
  bool degenerate = false;
  std::size_t n = 0;
  std::vector<double> std_errors;  // same layout as parameters()
};

class CondModel {
 public:
  CondModel() = default;

  // Parametric model from a parameter vector in the fitting layout:
  //   gaussian_linear:        [beta..., log_sigma]
  //   logistic_binary/poisson [beta...]
  //   zero_inflated_poisson:  [gamma..., beta...]
  //   zero_inflated_negbin:   [gamma..., beta..., log_theta]
  // where gamma are zero-inflation logit coefficients (full design or
  // intercept only) and beta the mean coefficients on the log link.
  static CondModel parametric(Family family, std::vector<std::string> design_names,
                              Eigen::VectorXd params, bool zero_inflation_covariates = true);

  // Empirical CDF per group; rows are [group code].
  static CondModel empirical(std::vector<Ecdf> groups, std::vector<std::string> level_names,
                             Support support);

  Family family() const noexcept { return family_; }
  Support support() const noexcept { return support_; }
  const std::vector<std::string>& design_names() const noexcept { return design_names_; }
  const Eigen::VectorXd& parameters() const noexcept { return params_; }
  std::vector<std::string> parameter_names() const;
  bool zero_inflation_covariates() const noexcept { return zi_covariates_; }
  const FitDiagnostics& diagnostics() const noexcept { return diag_; }
  void set_diagnostics(FitDiagnostics d) { diag_ = std::move(d); }

  std::size_t num_mean_coefficients() const;
  std::size_t num_zero_coefficients() const;
  Eigen::VectorXd mean_coefficients() const;
  Eigen::VectorXd zero_coefficients() const;
  double dispersion() const;      // theta for negbin
  double residual_scale() const;  // sigma for gaussian

  // Conditional mean of the count / gaussian / Bernoulli component.
  double component_mean(DesignRow row) const;
  // Structural-zero probability for zero-inflated families, else 0.
  double zero_probability(DesignRow row) const;

  // P(X <= x | row).
  double cdf(double x, DesignRow row) const;
  // P(X < x | row); contract error for continuous parametric families.
  double cdf_left(double x, DesignRow row) const;

  // Empirical models only.
  std::size_t group_code(std::string_view level) const;
  const std::vector<std::string>& levels() const noexcept { return levels_; }
  const std::vector<Ecdf>& groups() const noexcept { return groups_; }

  nlohmann::json to_json() const;

 private:
  void check_row(DesignRow row) const;
  const Ecdf& group_of(DesignRow row) const;

  Family family_ = Family::gaussian_linear;
  Support support_ = Support::continuous;
  std::vector<std::string> design_names_;
  Eigen::VectorXd params_;
  bool zi_covariates_ = true;
  std::vector<Ecdf> groups_;
  std::vector<std::string> levels_;
  FitDiagnostics diag_;
};

CondModel fit_conditional(Family family, std::span<const double> y, const DesignMatrix& design,
                          const FitOptions& opts = {});

// Empirical CDF of y separately for each group label. Every group needs at
// least two observations.
CondModel fit_empirical_by_group(std::span<const double> y, std::span<const std::string> groups,
                                 Support support = Support::atomic);
CondModel fit_empirical_by_group(std::span<const double> y, std::span<const std::size_t> codes,
                                 std::vector<std::string> level_names,
                                 Support support = Support::atomic);

double eval_cdf(const CondModel& m, double x, DesignRow row);
double eval_cdf_left(const CondModel& m, double x, DesignRow row);

// Log-likelihood of a parametric family with analytic gradient, in the
// parameter layout of CondModel::parametric.
class Likelihood {
 public:
  Likelihood(Family family, std::span<const double> y, const DesignMatrix& design,
             bool zero_inflation_covariates = true);

  std::size_t num_params() const noexcept { return num_params_; }
  // Sum over rows of the log-density; fills *grad with d/dparams.
  double log_likelihood(const Eigen::VectorXd& params, Eigen::VectorXd* grad) const;

 private:
  Family family_;
  std::span<const double> y_;
  const DesignMatrix& design_;
  bool zi_covariates_;
  std::size_t p_ = 0;
  std::size_t q_ = 0;
  std::size_t num_params_ = 0;
};

}  // namespace parity_forge
