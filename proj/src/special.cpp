#include "parity_forge/special.hpp"

#include <cmath>
#include <limits>

#include "parity_forge/error.hpp"

namespace parity_forge {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

// Upper bound on terms summed by the pmf recurrences before switching to the
// incomplete gamma / beta representation.
constexpr double kMaxSummedTerms = 1e5;

}  // namespace

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double digamma(double x) {
  if (x <= 0 && x == std::floor(x)) return std::numeric_limits<double>::quiet_NaN();
  double result = 0.0;
  if (x < 0) {
    // Reflection: psi(1 - x) - psi(x) = pi cot(pi x)
    return digamma(1.0 - x) - M_PI / std::tan(M_PI * x);
  }
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  double series =
      inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))));
  return result + std::log(x) - 0.5 * inv - series;
}

namespace {

double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

double gamma_cont_frac(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

double beta_cont_frac(double a, double b, double x) {
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0 || x < 0) throw Error(ErrorKind::domain, "gamma_p: invalid arguments");
  if (x == 0) return 0.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_cont_frac(a, x);
}

double gamma_q(double a, double x) {
  if (a <= 0 || x < 0) throw Error(ErrorKind::domain, "gamma_q: invalid arguments");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_cont_frac(a, x);
}

double beta_inc(double a, double b, double x) {
  if (a <= 0 || b <= 0 || x < 0 || x > 1) {
    throw Error(ErrorKind::domain, "beta_inc: invalid arguments");
  }
  if (x == 0) return 0.0;
  if (x == 1) return 1.0;
  double log_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) +
                     b * std::log1p(-x);
  double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_frac(a, b, x) / a;
  return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

double chi2_sf(double x, double df) {
  if (df <= 0) throw Error(ErrorKind::domain, "chi2_sf: df must be positive");
  if (x <= 0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::domain, "normal_quantile: p outside [0,1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    double num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                       67265.770927008700853) * r + 45921.953931549871457) * r +
                     13731.693765509461125) * r + 1971.5909503065514427) * r +
                   133.14166789178437745) * r + 3.387132872796366608);
    double den = (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                       39307.89580009271061) * r + 21213.794301586595867) * r +
                     5394.1960214247511077) * r + 687.1870074920579083) * r +
                   42.313330701600911252) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    double num = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                       0.24178072517745061177) * r + 1.27045825245236838258) * r +
                     3.64784832476320460504) * r + 5.7694972214606914055) * r +
                   4.6303378461565452959) * r + 1.42343711074968357734);
    double den = (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                       0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                     0.68976733498510000455) * r + 1.6763848301838038494) * r +
                   2.05319162663775882187) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                       0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                     0.29656057182850489123) * r + 1.7848265399172913358) * r +
                   5.4637849111641143699) * r + 6.6579046435011037772);
    double den = (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                       1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                     0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                   0.59983220655588793769) * r + 1.0);
    val = num / den;
  }
  return q < 0 ? -val : val;
}

double log1pexp(double x) {
  if (x > 35) return x;
  if (x < -35) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) { return -log1pexp(-x); }

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

double poisson_log_pmf(double k, double rate) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (rate == 0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return k * std::log(rate) - rate - log_gamma(k + 1.0);
}

double poisson_cdf_gamma(double k, double rate) {
  if (k < 0) return 0.0;
  k = std::floor(k);
  if (rate == 0) return 1.0;
  return gamma_q(k + 1.0, rate);
}

double poisson_cdf(double k, double rate) {
  if (k < 0) return 0.0;
  k = std::floor(k);
  if (rate == 0) return 1.0;
  if (k > kMaxSummedTerms || rate > 700.0) return poisson_cdf_gamma(k, rate);
  double term = std::exp(-rate);
  double sum = term;
  for (double j = 1; j <= k; j += 1.0) {
    term *= rate / j;
    sum += term;
    if (term < sum * 1e-17 && j > rate) break;
  }
  return std::min(sum, 1.0);
}

double negbin_log_pmf(double k, double mu, double theta) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  double log_p = std::log(theta / (theta + mu));
  double log_q = std::log(mu / (theta + mu));
  if (mu == 0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return log_gamma(k + theta) - log_gamma(theta) - log_gamma(k + 1.0) + theta * log_p +
         k * log_q;
}

double negbin_cdf_beta(double k, double mu, double theta) {
  if (k < 0) return 0.0;
  k = std::floor(k);
  if (mu == 0) return 1.0;
  return beta_inc(theta, k + 1.0, theta / (theta + mu));
}

double negbin_cdf(double k, double mu, double theta) {
  if (k < 0) return 0.0;
  k = std::floor(k);
  if (mu == 0) return 1.0;
  double log_p0 = theta * std::log(theta / (theta + mu));
  if (k > kMaxSummedTerms || log_p0 < -700.0) return negbin_cdf_beta(k, mu, theta);
  double ratio = mu / (theta + mu);
  double term = std::exp(log_p0);
  double sum = term;
  double mean = mu;
  for (double j = 0; j < k; j += 1.0) {
    term *= (j + theta) / (j + 1.0) * ratio;
    sum += term;
    if (term < sum * 1e-17 && j > mean) break;
  }
  return std::min(sum, 1.0);
}

std::int64_t poisson_from_uniform(double u, double rate) {
  if (rate <= 0) return 0;
  if (rate > 700.0) {
    // Bisection on the gamma representation.
    std::int64_t lo = 0, hi = static_cast<std::int64_t>(rate + 50 * std::sqrt(rate) + 50);
    while (lo < hi) {
      std::int64_t mid = lo + (hi - lo) / 2;
      if (poisson_cdf_gamma(static_cast<double>(mid), rate) >= u) hi = mid; else lo = mid + 1;
    }
    return lo;
  }
  double term = std::exp(-rate);
  double cdf = term;
  std::int64_t k = 0;
  while (cdf < u) {
    ++k;
    term *= rate / static_cast<double>(k);
    cdf += term;
    if (term == 0.0 && static_cast<double>(k) > rate) break;
  }
  return k;
}

std::int64_t negbin_from_uniform(double u, double mu, double theta) {
  if (mu <= 0) return 0;
  double ratio = mu / (theta + mu);
  double term = std::exp(theta * std::log(theta / (theta + mu)));
  double cdf = term;
  std::int64_t k = 0;
  while (cdf < u) {
    term *= (static_cast<double>(k) + theta) / (static_cast<double>(k) + 1.0) * ratio;
    ++k;
    cdf += term;
    if (term == 0.0 && static_cast<double>(k) > mu) break;
  }
  return k;
}

}  // namespace parity_forge
