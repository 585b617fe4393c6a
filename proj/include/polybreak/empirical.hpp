#pragma once

// Small empirical-distribution helpers for Monte Carlo output: order-statistic
// quantiles with binomial standard errors and Kolmogorov-Smirnov distances.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "polybreak/errors.hpp"

namespace polybreak {

struct QuantileEstimate {
  double level = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

namespace detail {

inline double order_stat(std::span<const double> sorted, double pos) {
  const auto last = static_cast<long>(sorted.size()) - 1;
  const long idx = std::clamp(static_cast<long>(std::ceil(pos)) - 1, 0L, last);
  return sorted[static_cast<std::size_t>(idx)];
}

}  // namespace detail

/// Empirical q-quantile (inverse of the empirical cdf) of an already sorted
/// sample. The standard error is half the width of the order-statistic band
/// N q +- sqrt(N q (1-q)) given by the binomial count of points below the
/// quantile.
inline QuantileEstimate quantile_sorted(std::span<const double> sorted, double q) {
  detail::require(!sorted.empty(), "quantile of an empty sample");
  detail::require(q > 0.0 && q < 1.0, "quantile level must lie in (0, 1)");
  const double n = static_cast<double>(sorted.size());
  const double centre = n * q;
  const double spread = std::sqrt(n * q * (1.0 - q));
  QuantileEstimate est;
  est.level = q;
  est.value = detail::order_stat(sorted, centre);
  est.std_error = 0.5 * (detail::order_stat(sorted, centre + spread) - detail::order_stat(sorted, centre - spread));
  return est;
}

inline std::vector<QuantileEstimate> quantiles(std::vector<double> sample, std::span<const double> levels) {
  std::sort(sample.begin(), sample.end());
  std::vector<QuantileEstimate> out;
  out.reserve(levels.size());
  for (double q : levels) out.push_back(quantile_sorted(sample, q));
  return out;
}

/// Fraction of the sample that is <= c.
inline double empirical_cdf(std::span<const double> sample, double c) {
  if (sample.empty()) return 0.0;
  const auto below = std::count_if(sample.begin(), sample.end(), [c](double v) { return v <= c; });
  return static_cast<double>(below) / static_cast<double>(sample.size());
}

/// sup_x |F_n(x) - F(x)| for a continuous reference cdf F.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
  detail::require(!sample.empty(), "KS distance of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample KS statistic sup_x |F_1(x) - F_2(x)|.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  detail::require(!a.empty() && !b.empty(), "KS statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Kolmogorov tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Asymptotic p-value of the two-sample KS statistic d for sizes na, nb,
/// with the usual small-sample correction of the effective size.
inline double ks_two_sample_pvalue(double d, std::size_t na, std::size_t nb) {
  const double ne = static_cast<double>(na) * static_cast<double>(nb) / static_cast<double>(na + nb);
  const double root = std::sqrt(ne);
  return kolmogorov_tail((root + 0.12 + 0.11 / root) * d);
}

}  // namespace polybreak
