#pragma once

// Special functions and distribution functions used by the fitting,
// transport and testing code.

#include <cstdint>

namespace parity_forge {

double log_gamma(double x);
double digamma(double x);

// Regularized lower / upper incomplete gamma P(a, x), Q(a, x). Series for
// x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

// Chi-square survival function P(X > x) with `df` degrees of freedom.
double chi2_sf(double x, double df);

double normal_cdf(double z);
// Inverse standard normal CDF (Wichura's AS 241, ~1e-16 relative accuracy).
double normal_quantile(double p);

double log1pexp(double x);   // log(1 + e^x)
double sigmoid(double x);
double log_sigmoid(double x);  // log(1 / (1 + e^-x))
double log_add_exp(double a, double b);

// Count distributions. `k` is a non-negative integer value.
double poisson_log_pmf(double k, double rate);
double poisson_cdf(double k, double rate);
// NB with mean mu and dispersion theta (variance mu + mu^2 / theta).
double negbin_log_pmf(double k, double mu, double theta);
double negbin_cdf(double k, double mu, double theta);

// Reference closed forms used to cross-check the summation routes.
double poisson_cdf_gamma(double k, double rate);
double negbin_cdf_beta(double k, double mu, double theta);

// Inverse-CDF sampling from a uniform u in (0, 1).
std::int64_t poisson_from_uniform(double u, double rate);
std::int64_t negbin_from_uniform(double u, double mu, double theta);

}  // namespace parity_forge
