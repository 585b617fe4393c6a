#pragma once

// Extreme-value critical values and p-values for the maximally selected
// likelihood ratio. Under no change the recentred statistic T - g(n, p, gamma)
// is asymptotically distributed as exp(-2 exp(-x/2)), where
//
//   g(n,p,gamma) = 2 log log h + (p+1) log log log h
//                  - 2 log( 2^{(p+1)/2} Gamma((p+1)/2) / (p+1) ),
//   h(n) = n (log n)^gamma.
//
// All logarithms are natural.

#include <algorithm>
#include <cmath>
#include <string>

#include "polybreak/errors.hpp"

namespace polybreak {

/// Gamma function on (0, 30].
inline double gamma_function(double t) {
  detail::require(t > 0.0 && t <= 30.0, "gamma_function argument must lie in (0, 30]");
  return std::tgamma(t);
}

/// h(n) = n (log n)^gamma.
inline double h_of(int n, double gamma) {
  const double ln = std::log(static_cast<double>(n));
  return static_cast<double>(n) * std::pow(ln, gamma);
}

struct CriticalValueSpec {
  int n = 0;
  int order = 0;
  double gamma = 0.0;
  double alpha = 0.05;

  void validate() const {
    detail::require(order >= 0, "polynomial order must be non-negative");
    detail::require(n >= 8, "asymptotic critical values need n >= 8");
    detail::require(std::isfinite(gamma), "gamma must be finite");
    detail::require(h_of(n, gamma) > std::exp(1.0),
                    "h(n) = n (log n)^gamma must exceed e for n=" + std::to_string(n) +
                        ", gamma=" + std::to_string(gamma));
    detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  }
};

/// 2 log( 2^{(p+1)/2} Gamma((p+1)/2) / (p+1) ); zero for p = 1.
inline double gumbel_constant(int order) {
  const double d = order + 1.0;
  return 2.0 * (0.5 * d * std::log(2.0) + std::lgamma(0.5 * d) - std::log(d));
}

/// Location correction g(n, p, gamma).
inline double correction_g(int n, int order, double gamma) {
  detail::require(order >= 0, "polynomial order must be non-negative");
  detail::require(n >= 8, "asymptotic correction needs n >= 8");
  const double h = h_of(n, gamma);
  detail::require(h > std::exp(1.0), "h(n) must exceed e for the triple logarithm");
  const double ll = std::log(std::log(h));
  return 2.0 * ll + (order + 1.0) * std::log(ll) - gumbel_constant(order);
}

/// Limit distribution function exp(-2 e^{-x/2}) of the recentred statistic.
inline double limit_cdf(double x) { return std::exp(-2.0 * std::exp(-0.5 * x)); }

/// Distribution function exp(-e^{-x/2}) of one half-sample supremum.
inline double half_limit_cdf(double x) { return std::exp(-std::exp(-0.5 * x)); }

/// Quantile of the limit law: x with limit_cdf(x) = u.
inline double limit_quantile(double u) {
  detail::require(u > 0.0 && u < 1.0, "quantile level must lie in (0, 1)");
  return -2.0 * std::log(-0.5 * std::log(u));
}

/// c(n, alpha) = -2 log(-0.5 log(1 - alpha)) + g(n, p, gamma).
inline double critical_value(const CriticalValueSpec& spec) {
  spec.validate();
  return -2.0 * std::log(-0.5 * std::log1p(-spec.alpha)) +
         correction_g(spec.n, spec.order, spec.gamma);
}

/// 1 - exp(-2 e^{-(T - g)/2}), clamped to [0, 1].
inline double p_value(double statistic, int n, int order, double gamma) {
  detail::require(std::isfinite(statistic), "statistic must be finite");
  const double x = statistic - correction_g(n, order, gamma);
  const double p = -std::expm1(-2.0 * std::exp(-0.5 * x));
  return std::clamp(p, 0.0, 1.0);
}

struct GammaChoice {
  double value = 0.0;
  bool calibrated = false;  ///< false when no calibrated value exists for this order
};

/// Default calibration exponent: 0 for linear and 1 for quadratic
/// regression. Other orders get an uncalibrated extrapolation (p - 1, and 0
/// for a constant mean).
inline GammaChoice default_gamma(int order) {
  detail::require(order >= 0, "polynomial order must be non-negative");
  if (order == 1) return {0.0, true};
  if (order == 2) return {1.0, true};
  if (order == 0) return {0.0, false};
  return {static_cast<double>(order - 1), false};
}

}  // namespace polybreak
