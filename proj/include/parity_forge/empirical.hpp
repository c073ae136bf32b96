#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace parity_forge {

// Empirical distribution of a sample. Tied observations collapse into one
// support point carrying their summed mass.
class Ecdf {
 public:
  Ecdf() = default;
  explicit Ecdf(std::span<const double> sample);

  bool empty() const noexcept { return support_.empty(); }
  std::size_t n() const noexcept { return n_; }
  std::span<const double> support() const noexcept { return support_; }
  std::span<const double> cum_probs() const noexcept { return cum_probs_; }

  // P(X <= x).
  double eval(double x) const;
  // P(X < x), the left limit F(x-).
  double left(double x) const;
  // Left-continuous inverse inf{x : F(x) >= p}. p = 0 gives the smallest
  // support point and p = 1 the largest.
  double quantile(double p) const;

  // Probability mass at x (zero off the support).
  double mass(double x) const { return eval(x) - left(x); }

 private:
  std::vector<double> support_;
  std::vector<double> cum_probs_;
  std::size_t n_ = 0;
};

// Exact W_q^q between two atomic distributions by integrating
// |F^{-1}(p) - G^{-1}(p)|^q over the merged breakpoints of [0, 1].
double wasserstein_qq(const Ecdf& a, const Ecdf& b, double q);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

// One-sample KS distance of a sample against Uniform(0, 1).
double ks_uniform(std::span<const double> sample);

// Empirical CDF of a sample evaluated on a grid.
std::vector<double> cdf_on_grid(std::span<const double> sample, std::span<const double> grid);

// Gaussian kernel density on a grid; bandwidth <= 0 selects Silverman's rule
// 0.9 min(sd, IQR / 1.34) n^(-1/5).
std::vector<double> density_on_grid(std::span<const double> sample, std::span<const double> grid,
                                    double bandwidth = 0.0);

// Empirical quantile Q(p, x) of a sample (left-continuous inverse).
double sample_quantile(std::span<const double> sample, double p);

}  // namespace parity_forge
