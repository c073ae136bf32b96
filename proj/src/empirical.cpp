#include "parity_forge/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parity_forge/error.hpp"

namespace parity_forge {

Ecdf::Ecdf(std::span<const double> sample) : n_(sample.size()) {
  if (sample.empty()) throw Error(ErrorKind::insufficient_data, "empirical CDF of empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  for (double v : sorted) {
    if (std::isnan(v)) throw Error(ErrorKind::propagation, "NaN in empirical CDF sample");
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(n_);
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    support_.push_back(sorted[i]);
    // Integer counts divided once: each entry is correctly rounded and the
    // last is exactly 1.
    cum_probs_.push_back(static_cast<double>(j) / n);
    i = j;
  }
}

double Ecdf::eval(double x) const {
  auto it = std::upper_bound(support_.begin(), support_.end(), x);
  if (it == support_.begin()) return 0.0;
  return cum_probs_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double Ecdf::left(double x) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), x);
  if (it == support_.begin()) return 0.0;
  return cum_probs_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double Ecdf::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::domain, "quantile: p = " + std::to_string(p) + " outside [0,1]");
  }
  auto it = std::lower_bound(cum_probs_.begin(), cum_probs_.end(), p);
  if (it == cum_probs_.end()) return support_.back();
  return support_[static_cast<std::size_t>(it - cum_probs_.begin())];
}

double wasserstein_qq(const Ecdf& a, const Ecdf& b, double q) {
  auto ca = a.cum_probs();
  auto cb = b.cum_probs();
  auto sa = a.support();
  auto sb = b.support();
  std::size_t i = 0, j = 0;
  double prev = 0.0;
  double total = 0.0;
  while (i < ca.size() && j < cb.size()) {
    double next = std::min(ca[i], cb[j]);
    total += (next - prev) * std::pow(std::fabs(sa[i] - sb[j]), q);
    prev = next;
    if (ca[i] == next) ++i;
    if (cb[j] == next) ++j;
  }
  return total;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_uniform(std::span<const double> sample) {
  if (sample.empty()) return 0.0;
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double u = std::clamp(s[i], 0.0, 1.0);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n));
  }
  return d;
}

std::vector<double> cdf_on_grid(std::span<const double> sample, std::span<const double> grid) {
  std::vector<double> out(grid.size(), 0.0);
  if (sample.empty()) return out;
  Ecdf e(sample);
  for (std::size_t g = 0; g < grid.size(); ++g) out[g] = e.eval(grid[g]);
  return out;
}

std::vector<double> density_on_grid(std::span<const double> sample, std::span<const double> grid,
                                    double bandwidth) {
  std::vector<double> out(grid.size(), 0.0);
  const double n = static_cast<double>(sample.size());
  if (sample.empty()) return out;
  if (bandwidth <= 0) {
    double mean = 0;
    for (double v : sample) mean += v;
    mean /= n;
    double ss = 0;
    for (double v : sample) ss += (v - mean) * (v - mean);
    double sd = sample.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    Ecdf e(sample);
    double iqr = e.quantile(0.75) - e.quantile(0.25);
    double spread = iqr > 0 ? std::min(sd, iqr / 1.34) : sd;
    bandwidth = 0.9 * spread * std::pow(n, -0.2);
    if (!(bandwidth > 0)) bandwidth = 1e-3;
  }
  const double norm = 1.0 / (n * bandwidth * std::sqrt(2.0 * M_PI));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0;
    for (double v : sample) {
      double z = (grid[g] - v) / bandwidth;
      s += std::exp(-0.5 * z * z);
    }
    out[g] = s * norm;
  }
  return out;
}

double sample_quantile(std::span<const double> sample, double p) {
  return Ecdf(sample).quantile(p);
}

}  // namespace parity_forge
