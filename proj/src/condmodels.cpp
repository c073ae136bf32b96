#include "parity_forge/condmodels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "parity_forge/error.hpp"
#include "parity_forge/special.hpp"

namespace parity_forge {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::empirical_by_group: return "empirical_by_group";
    case Family::gaussian_linear: return "gaussian_linear";
    case Family::logistic_binary: return "logistic_binary";
    case Family::poisson: return "poisson";
    case Family::zero_inflated_poisson: return "zero_inflated_poisson";
    case Family::zero_inflated_negbin: return "zero_inflated_negbin";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  for (Family f : {Family::empirical_by_group, Family::gaussian_linear, Family::logistic_binary,
                   Family::poisson, Family::zero_inflated_poisson, Family::zero_inflated_negbin}) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorKind::config, "unknown model family '" + std::string(s) + "'");
}

DesignMatrix intercept_design(std::size_t n) {
  DesignMatrix d;
  d.names = {std::string(kIntercept)};
  d.X = RowMatrix::Ones(static_cast<Eigen::Index>(n), 1);
  return d;
}

namespace {

bool is_zero_inflated(Family f) {
  return f == Family::zero_inflated_poisson || f == Family::zero_inflated_negbin;
}

bool is_count(Family f) {
  return f == Family::poisson || is_zero_inflated(f);
}

double dot(DesignRow row, const double* coef) {
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) s += row[k] * coef[k];
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Likelihood

Likelihood::Likelihood(Family family, std::span<const double> y, const DesignMatrix& design,
                       bool zero_inflation_covariates)
    : family_(family), y_(y), design_(design), zi_covariates_(zero_inflation_covariates) {
  if (family == Family::empirical_by_group) {
    throw Error(ErrorKind::contract, "empirical_by_group has no parametric likelihood");
  }
  if (design.rows() != y.size()) {
    throw Error(ErrorKind::contract, "design has " + std::to_string(design.rows()) +
                                         " rows but response has " + std::to_string(y.size()));
  }
  p_ = design.cols();
  q_ = is_zero_inflated(family) ? (zi_covariates_ ? p_ : 1) : 0;
  num_params_ = q_ + p_ + ((family == Family::zero_inflated_negbin ||
                            family == Family::gaussian_linear) ? 1 : 0);
}

double Likelihood::log_likelihood(const Eigen::VectorXd& params, Eigen::VectorXd* grad) const {
  const std::size_t n = y_.size();
  const double* gamma = params.data();
  const double* beta = params.data() + q_;
  if (grad) grad->setZero(static_cast<Eigen::Index>(num_params_));
  double* g = grad ? grad->data() : nullptr;
  double ll = 0.0;

  switch (family_) {
    case Family::gaussian_linear: {
      const double log_sigma = params[static_cast<Eigen::Index>(p_)];
      const double inv_var = std::exp(-2.0 * log_sigma);
      for (std::size_t i = 0; i < n; ++i) {
        DesignRow x = design_.row(i);
        double r = y_[i] - dot(x, beta);
        ll += -0.5 * std::log(2.0 * M_PI) - log_sigma - 0.5 * r * r * inv_var;
        if (g) {
          double d = r * inv_var;
          for (std::size_t k = 0; k < p_; ++k) g[k] += d * x[k];
          g[p_] += -1.0 + r * r * inv_var;
        }
      }
      break;
    }
    case Family::logistic_binary: {
      for (std::size_t i = 0; i < n; ++i) {
        DesignRow x = design_.row(i);
        double eta = dot(x, beta);
        ll += y_[i] * eta - log1pexp(eta);
        if (g) {
          double d = y_[i] - sigmoid(eta);
          for (std::size_t k = 0; k < p_; ++k) g[k] += d * x[k];
        }
      }
      break;
    }
    case Family::poisson: {
      for (std::size_t i = 0; i < n; ++i) {
        DesignRow x = design_.row(i);
        double eta = dot(x, beta);
        double mu = std::exp(eta);
        ll += y_[i] * eta - mu - log_gamma(y_[i] + 1.0);
        if (g) {
          double d = y_[i] - mu;
          for (std::size_t k = 0; k < p_; ++k) g[k] += d * x[k];
        }
      }
      break;
    }
    case Family::zero_inflated_poisson:
    case Family::zero_inflated_negbin: {
      const bool nb = family_ == Family::zero_inflated_negbin;
      const double alpha = nb ? params[static_cast<Eigen::Index>(q_ + p_)] : 0.0;
      const double theta = std::exp(alpha);
      const double dig_theta = nb ? digamma(theta) : 0.0;
      const double lg_theta = nb ? log_gamma(theta) : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        DesignRow x = design_.row(i);
        const double zeta = zi_covariates_ ? dot(x, gamma) : gamma[0];
        const double eta = dot(x, beta);
        const double mu = std::exp(eta);
        const double log_pi = log_sigmoid(zeta);
        const double log_1mpi = log_sigmoid(-zeta);
        const double pi = sigmoid(zeta);
        const double yi = y_[i];

        double d_zeta, d_eta, d_alpha = 0.0;
        if (yi == 0.0) {
          double log_p0, dlp0_eta, dlp0_alpha = 0.0;
          if (nb) {
            const double sp = log1pexp(eta - alpha);  // log(1 + mu/theta)
            const double r = sigmoid(eta - alpha);    // mu / (theta + mu)
            log_p0 = -theta * sp;
            dlp0_eta = -theta * r;
            dlp0_alpha = theta * (-sp + r);
          } else {
            log_p0 = -mu;
            dlp0_eta = -mu;
          }
          const double L = log_add_exp(log_pi, log_1mpi + log_p0);
          ll += L;
          const double a = std::exp(log_pi - L);             // pi / D
          const double b = std::exp(log_1mpi + log_p0 - L);  // (1-pi) p0 / D
          d_zeta = (1.0 - pi) * a - pi * b;
          d_eta = b * dlp0_eta;
          d_alpha = b * dlp0_alpha;
        } else {
          double lf;
          if (nb) {
            const double sp_a = log1pexp(eta - alpha);  // -log(theta/(theta+mu))
            const double sp_b = log1pexp(alpha - eta);  // -log(mu/(theta+mu))
            const double r = sigmoid(eta - alpha);
            lf = log_gamma(yi + theta) - lg_theta - log_gamma(yi + 1.0) - theta * sp_a - yi * sp_b;
            d_eta = yi - (yi + theta) * r;
            d_alpha = theta * (digamma(yi + theta) - dig_theta - sp_a + (mu - yi) / (theta + mu));
          } else {
            lf = yi * eta - mu - log_gamma(yi + 1.0);
            d_eta = yi - mu;
          }
          ll += log_1mpi + lf;
          d_zeta = -pi;
        }
        if (g) {
          if (zi_covariates_) {
            for (std::size_t k = 0; k < p_; ++k) g[k] += d_zeta * x[k];
          } else {
            g[0] += d_zeta;
          }
          for (std::size_t k = 0; k < p_; ++k) g[q_ + k] += d_eta * x[k];
          if (nb) g[q_ + p_] += d_alpha;
        }
      }
      break;
    }
    case Family::empirical_by_group:
      break;
  }
  return ll;
}

// ---------------------------------------------------------------------------
// CondModel

CondModel CondModel::parametric(Family family, std::vector<std::string> design_names,
                                Eigen::VectorXd params, bool zero_inflation_covariates) {
  if (family == Family::empirical_by_group) {
    throw Error(ErrorKind::contract, "use CondModel::empirical for empirical_by_group");
  }
  CondModel m;
  m.family_ = family;
  m.support_ = family == Family::gaussian_linear ? Support::continuous : Support::atomic;
  m.design_names_ = std::move(design_names);
  m.zi_covariates_ = zero_inflation_covariates;
  const std::size_t p = m.design_names_.size();
  std::size_t expected = p;
  if (is_zero_inflated(family)) expected += zero_inflation_covariates ? p : 1;
  if (family == Family::gaussian_linear || family == Family::zero_inflated_negbin) expected += 1;
  if (static_cast<std::size_t>(params.size()) != expected) {
    throw Error(ErrorKind::contract, std::string(to_string(family)) + " expects " +
                                         std::to_string(expected) + " parameters, got " +
                                         std::to_string(params.size()));
  }
  m.params_ = std::move(params);
  return m;
}

CondModel CondModel::empirical(std::vector<Ecdf> groups, std::vector<std::string> level_names,
                               Support support) {
  if (groups.size() != level_names.size()) {
    throw Error(ErrorKind::contract, "empirical model: one level name per group required");
  }
  CondModel m;
  m.family_ = Family::empirical_by_group;
  m.support_ = support;
  m.design_names_ = {"group"};
  m.groups_ = std::move(groups);
  m.levels_ = std::move(level_names);
  return m;
}

std::size_t CondModel::num_mean_coefficients() const { return design_names_.size(); }

std::size_t CondModel::num_zero_coefficients() const {
  if (!is_zero_inflated(family_)) return 0;
  return zi_covariates_ ? design_names_.size() : 1;
}

Eigen::VectorXd CondModel::mean_coefficients() const {
  if (family_ == Family::empirical_by_group) return {};
  return params_.segment(static_cast<Eigen::Index>(num_zero_coefficients()),
                         static_cast<Eigen::Index>(num_mean_coefficients()));
}

Eigen::VectorXd CondModel::zero_coefficients() const {
  return params_.head(static_cast<Eigen::Index>(num_zero_coefficients()));
}

double CondModel::dispersion() const {
  if (family_ != Family::zero_inflated_negbin) return std::numeric_limits<double>::infinity();
  return std::exp(params_[params_.size() - 1]);
}

double CondModel::residual_scale() const {
  if (family_ != Family::gaussian_linear) return 0.0;
  return std::exp(params_[params_.size() - 1]);
}

std::vector<std::string> CondModel::parameter_names() const {
  std::vector<std::string> names;
  if (family_ == Family::empirical_by_group) return names;
  if (is_zero_inflated(family_)) {
    if (zi_covariates_) {
      for (const auto& n : design_names_) names.push_back("zero:" + n);
    } else {
      names.push_back("zero:" + std::string(kIntercept));
    }
  }
  for (const auto& n : design_names_) names.push_back(n);
  if (family_ == Family::gaussian_linear) names.push_back("log_sigma");
  if (family_ == Family::zero_inflated_negbin) names.push_back("log_theta");
  return names;
}

void CondModel::check_row(DesignRow row) const {
  if (row.size() != design_names_.size()) {
    throw Error(ErrorKind::contract, "design row has " + std::to_string(row.size()) +
                                         " entries, model expects " +
                                         std::to_string(design_names_.size()));
  }
}

const Ecdf& CondModel::group_of(DesignRow row) const {
  check_row(row);
  double code = row[0];
  if (!(code >= 0) || code != std::floor(code) ||
      static_cast<std::size_t>(code) >= groups_.size() ||
      groups_[static_cast<std::size_t>(code)].empty()) {
    throw Error(ErrorKind::lookup, "no fitted group for code " + std::to_string(code));
  }
  return groups_[static_cast<std::size_t>(code)];
}

std::size_t CondModel::group_code(std::string_view level) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i] == level && !groups_[i].empty()) return i;
  }
  throw Error(ErrorKind::lookup, "group '" + std::string(level) + "' was not seen at fit time");
}

double CondModel::component_mean(DesignRow row) const {
  check_row(row);
  const double* beta = params_.data() + num_zero_coefficients();
  double eta = dot(row, beta);
  switch (family_) {
    case Family::gaussian_linear: return eta;
    case Family::logistic_binary: return sigmoid(eta);
    case Family::empirical_by_group: return std::numeric_limits<double>::quiet_NaN();
    default: return std::exp(eta);
  }
}

double CondModel::zero_probability(DesignRow row) const {
  if (!is_zero_inflated(family_)) return 0.0;
  check_row(row);
  double zeta = zi_covariates_ ? dot(row, params_.data()) : params_[0];
  return sigmoid(zeta);
}

double CondModel::cdf(double x, DesignRow row) const {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  switch (family_) {
    case Family::empirical_by_group:
      return group_of(row).eval(x);
    case Family::gaussian_linear: {
      double mu = component_mean(row);
      double sigma = residual_scale();
      if (sigma == 0.0) return x >= mu ? 1.0 : 0.0;
      return normal_cdf((x - mu) / sigma);
    }
    case Family::logistic_binary: {
      double p = component_mean(row);
      if (x < 0) return 0.0;
      if (x < 1) return 1.0 - p;
      return 1.0;
    }
    case Family::poisson:
      return poisson_cdf(std::floor(x), component_mean(row));
    case Family::zero_inflated_poisson: {
      if (x < 0) return 0.0;
      double pi = zero_probability(row);
      return pi + (1.0 - pi) * poisson_cdf(std::floor(x), component_mean(row));
    }
    case Family::zero_inflated_negbin: {
      if (x < 0) return 0.0;
      double pi = zero_probability(row);
      return pi + (1.0 - pi) * negbin_cdf(std::floor(x), component_mean(row), dispersion());
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double CondModel::cdf_left(double x, DesignRow row) const {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  switch (family_) {
    case Family::empirical_by_group:
      return group_of(row).left(x);
    case Family::gaussian_linear:
      throw Error(ErrorKind::contract, "left-limit CDF requested for a continuous family");
    case Family::logistic_binary: {
      double p = component_mean(row);
      if (x <= 0) return 0.0;
      if (x <= 1) return 1.0 - p;
      return 1.0;
    }
    default:
      if (x <= 0) return 0.0;
      return cdf(std::ceil(x) - 1.0, row);
  }
}

nlohmann::json CondModel::to_json() const {
  nlohmann::json j;
  j["family"] = to_string(family_);
  j["support"] = support_ == Support::continuous ? "continuous" : "atomic";
  j["design"] = design_names_;
  if (family_ == Family::empirical_by_group) {
    nlohmann::json groups = nlohmann::json::array();
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      groups.push_back({{"level", levels_[g]}, {"n", groups_[g].n()}});
    }
    j["groups"] = groups;
  } else {
    nlohmann::json coef = nlohmann::json::object();
    auto names = parameter_names();
    for (std::size_t k = 0; k < names.size(); ++k) {
      coef[names[k]] = params_[static_cast<Eigen::Index>(k)];
    }
    j["coefficients"] = coef;
    j["zero_inflation_covariates"] = zi_covariates_;
  }
  j["diagnostics"] = {{"log_likelihood", diag_.log_likelihood},
                      {"iterations", diag_.iterations},
                      {"gradient_norm", diag_.gradient_norm},
                      {"converged", diag_.converged},
                      {"degenerate", diag_.degenerate},
                      {"n", diag_.n},
                      {"std_errors", diag_.std_errors}};
  return j;
}

double eval_cdf(const CondModel& m, double x, DesignRow row) { return m.cdf(x, row); }
double eval_cdf_left(const CondModel& m, double x, DesignRow row) { return m.cdf_left(x, row); }

// ---------------------------------------------------------------------------
// Fitting

namespace {

void check_response(Family family, std::span<const double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    double v = y[i];
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::contract, "non-finite response at row " + std::to_string(i));
    }
    if (is_count(family) && (v < 0 || v != std::floor(v))) {
      throw Error(ErrorKind::contract, std::string(to_string(family)) +
                                           " needs non-negative integer responses; row " +
                                           std::to_string(i) + " has " + std::to_string(v));
    }
    if (family == Family::logistic_binary && v != 0.0 && v != 1.0) {
      throw Error(ErrorKind::contract,
                  "logistic_binary needs {0,1} responses; row " + std::to_string(i));
    }
  }
}

std::vector<double> standard_errors(const Objective& nll_total, const Eigen::VectorXd& x) {
  Eigen::MatrixXd H = numeric_hessian(nll_total, x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  std::vector<double> se(static_cast<std::size_t>(x.size()),
                         std::numeric_limits<double>::quiet_NaN());
  if (es.info() != Eigen::Success) return se;
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() <= 1e-10 * std::max(1.0, ev.maxCoeff())) return se;
  Eigen::MatrixXd inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose();
  for (Eigen::Index k = 0; k < x.size(); ++k) se[static_cast<std::size_t>(k)] = std::sqrt(inv(k, k));
  return se;
}

CondModel fit_gaussian(std::span<const double> y, const DesignMatrix& design, const FitOptions& opts) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::MatrixXd X = design.X;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  Eigen::VectorXd beta = qr.solve(yv);
  Eigen::VectorXd resid = yv - X * beta;
  double rss = resid.squaredNorm();
  double sigma = std::sqrt(rss / static_cast<double>(n));
  double scale_ref = std::max(1.0, yv.cwiseAbs().maxCoeff());
  bool degenerate = sigma <= 1e-12 * scale_ref;
  if (degenerate) sigma = 0.0;

  Eigen::VectorXd params(beta.size() + 1);
  params.head(beta.size()) = beta;
  params[beta.size()] = degenerate ? -std::numeric_limits<double>::infinity() : std::log(sigma);
  CondModel m = CondModel::parametric(Family::gaussian_linear, design.names, params);

  FitDiagnostics d;
  d.n = y.size();
  d.iterations = 0;
  d.degenerate = degenerate;
  d.converged = true;
  if (!degenerate) {
    Likelihood lik(Family::gaussian_linear, y, design);
    Eigen::VectorXd g;
    d.log_likelihood = lik.log_likelihood(params, &g);
    d.gradient_norm = (g / static_cast<double>(n)).norm();
    if (opts.std_errors && qr.rank() == X.cols()) {
      Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
      for (Eigen::Index k = 0; k < beta.size(); ++k) {
        d.std_errors.push_back(sigma * std::sqrt(xtx_inv(k, k)));
      }
      d.std_errors.push_back(std::sqrt(0.5 / static_cast<double>(n)));  // log sigma
    }
  } else {
    d.log_likelihood = std::numeric_limits<double>::infinity();
  }
  m.set_diagnostics(std::move(d));
  return m;
}

Eigen::VectorXd start_values(Family family, std::span<const double> y, std::size_t p, std::size_t q,
                             std::size_t num_params) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params));
  double n = static_cast<double>(y.size());
  double sum = 0.0, zeros = 0.0, pos_sum = 0.0;
  for (double v : y) {
    sum += v;
    if (v == 0) zeros += 1;
    else pos_sum += v;
  }
  double mean = sum / n;
  switch (family) {
    case Family::logistic_binary: {
      double pm = std::clamp(mean, 1e-3, 1 - 1e-3);
      x0[0] = std::log(pm / (1 - pm));
      break;
    }
    case Family::poisson:
      x0[0] = std::log(mean);
      break;
    case Family::zero_inflated_poisson:
    case Family::zero_inflated_negbin: {
      // Moment split of the zeros: count mean from the positive part, the
      // excess zeros go to the inflation component.
      double pos_mean = pos_sum / std::max(1.0, n - zeros);
      double lambda = std::max(pos_mean, 0.1);
      double p0_count = std::exp(-lambda);
      double zero_frac = zeros / n;
      double pi = (zero_frac - p0_count) / (1.0 - p0_count);
      pi = std::clamp(pi, 0.05, 0.95);
      x0[0] = std::log(pi / (1 - pi));
      x0[static_cast<Eigen::Index>(q)] = std::log(lambda);
      (void)p;
      break;
    }
    default:
      break;
  }
  return x0;
}

}  // namespace

CondModel fit_conditional(Family family, std::span<const double> y, const DesignMatrix& design,
                          const FitOptions& opts) {
  if (family == Family::empirical_by_group) {
    throw Error(ErrorKind::contract, "empirical_by_group is fitted with fit_empirical_by_group");
  }
  if (design.rows() != y.size()) {
    throw Error(ErrorKind::contract, "design has " + std::to_string(design.rows()) +
                                         " rows but response has " + std::to_string(y.size()));
  }
  if (y.empty()) throw Error(ErrorKind::insufficient_data, "cannot fit a model to zero rows");
  if (design.names.empty() || design.names.front() != kIntercept) {
    throw Error(ErrorKind::contract, "design must start with an intercept column");
  }
  check_response(family, y);
  if (family == Family::gaussian_linear) return fit_gaussian(y, design, opts);

  bool all_zero = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
  if (all_zero && is_count(family)) {
    throw Error(ErrorKind::degenerate, std::string(to_string(family)) +
                                           ": all responses are zero, rate is not identifiable");
  }

  Likelihood lik(family, y, design, opts.zero_inflation_covariates);
  const double n = static_cast<double>(y.size());
  Objective mean_nll = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    double ll = lik.log_likelihood(x, grad);
    if (grad) *grad /= -n;
    return -ll / n;
  };
  const std::size_t p = design.cols();
  const std::size_t q = is_zero_inflated(family) ? (opts.zero_inflation_covariates ? p : 1) : 0;
  Eigen::VectorXd x0 = start_values(family, y, p, q, lik.num_params());
  OptimResult res = minimize_bfgs(mean_nll, x0, opts.optim);

  if (family == Family::logistic_binary) {
    bool saturated = res.value < 1e-6;
    if (res.x.norm() > opts.separation_norm || saturated) {
      throw Error(ErrorKind::divergence,
                  "logistic fit diverged (perfect or quasi-complete separation); coefficient norm " +
                      std::to_string(res.x.norm()));
    }
  }
  if (!res.converged) {
    throw ConvergenceError(std::string(to_string(family)) + " fit did not converge after " +
                               std::to_string(res.iterations) + " iterations (gradient norm " +
                               std::to_string(res.gradient_norm) + ")",
                           std::vector<double>(res.x.data(), res.x.data() + res.x.size()),
                           res.gradient_norm);
  }

  CondModel m = CondModel::parametric(family, design.names, res.x, opts.zero_inflation_covariates);
  FitDiagnostics d;
  d.n = y.size();
  d.log_likelihood = -res.value * n;
  d.iterations = res.iterations;
  d.gradient_norm = res.gradient_norm;
  d.converged = res.converged;
  if (opts.std_errors) {
    Objective total_nll = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      double ll = lik.log_likelihood(x, grad);
      if (grad) *grad = -*grad;
      return -ll;
    };
    d.std_errors = standard_errors(total_nll, res.x);
  }
  m.set_diagnostics(std::move(d));
  return m;
}

CondModel fit_empirical_by_group(std::span<const double> y, std::span<const std::size_t> codes,
                                 std::vector<std::string> level_names, Support support) {
  if (codes.size() != y.size()) {
    throw Error(ErrorKind::contract, "group codes and response differ in length");
  }
  std::vector<std::vector<double>> buckets(level_names.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (codes[i] >= level_names.size()) {
      throw Error(ErrorKind::lookup, "group code " + std::to_string(codes[i]) + " has no level name");
    }
    buckets[codes[i]].push_back(y[i]);
  }
  std::vector<Ecdf> groups;
  groups.reserve(buckets.size());
  for (std::size_t g = 0; g < buckets.size(); ++g) {
    if (buckets[g].empty()) {
      groups.emplace_back();
      continue;
    }
    if (buckets[g].size() < 2) {
      throw Error(ErrorKind::insufficient_data,
                  "group '" + level_names[g] + "' has a single observation");
    }
    groups.emplace_back(buckets[g]);
  }
  CondModel m = CondModel::empirical(std::move(groups), std::move(level_names), support);
  FitDiagnostics d;
  d.n = y.size();
  m.set_diagnostics(d);
  return m;
}

CondModel fit_empirical_by_group(std::span<const double> y, std::span<const std::string> groups,
                                 Support support) {
  std::map<std::string, std::size_t> index;
  for (const auto& g : groups) index.emplace(g, 0);
  std::vector<std::string> names;
  for (auto& [k, v] : index) {
    v = names.size();
    names.push_back(k);
  }
  std::vector<std::size_t> codes(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) codes[i] = index.at(groups[i]);
  return fit_empirical_by_group(y, codes, std::move(names), support);
}

}  // namespace parity_forge
