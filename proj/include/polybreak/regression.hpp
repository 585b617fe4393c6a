#pragma once

// Polynomial design rows, segment least-squares fits and the split Gram
// matrices / score vectors of the polynomial change-point model
//
//   y_i = x_i^T beta_i + e_i,   x_i = (1, i/n, ..., (i/n)^p)^T,   i = 1..n.
//
// All indices in this header are 1-based and segments are inclusive.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "polybreak/errors.hpp"
#include "polybreak/linalg.hpp"

namespace polybreak {

enum class DesignScaling {
  scaled,  ///< powers of i/n
  raw,     ///< powers of i
};

/// Relative pivot below which a segment design is reported as rank deficient.
inline constexpr double kRankTolerance = 1e-12;

/// An ordered series of responses together with the polynomial order of the
/// regression fitted to it.
class Sample {
 public:
  Sample(std::vector<double> y, int order) : y_(std::move(y)), order_(order) {
    detail::require(order_ >= 0, "polynomial order must be non-negative");
    const auto n = static_cast<long>(y_.size());
    detail::require(n >= 2L * order_ + 6,
                    "series of length " + std::to_string(n) + " is too short for order " +
                        std::to_string(order_) + " (need at least 2p+6 values)");
    for (double v : y_) detail::require(std::isfinite(v), "series contains a non-finite value");
  }

  [[nodiscard]] int size() const { return static_cast<int>(y_.size()); }
  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] std::span<const double> y() const { return y_; }

 private:
  std::vector<double> y_;
  int order_;
};

struct DesignRow {
  Vector<double> entries;
  DesignScaling scaling;
};

namespace detail {

template <class Real>
void fill_design_row(Real* out, int i, int n, int order, DesignScaling scaling) {
  const Real base = scaling == DesignScaling::scaled ? Real(i) / Real(n) : Real(i);
  Real power = Real(1);
  for (int j = 0; j <= order; ++j) {
    out[j] = power;
    power *= base;
  }
}

inline double centered_sum_of_squares(std::span<const double> y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double total = 0.0;
  for (double v : y) total += (v - mean) * (v - mean);
  return total;
}

}  // namespace detail

/// True when a residual sum is zero up to rounding, measured against the
/// centered sum of squares of the whole series.
inline bool negligible_rss(double rss, double centered_ss) {
  return centered_ss == 0.0 || rss <= 1e-24 * centered_ss;
}

inline DesignRow design_row(int i, int n, int order, DesignScaling scaling) {
  detail::require(order >= 0, "polynomial order must be non-negative");
  detail::require(n >= 1 && i >= 1 && i <= n,
                  "design index " + std::to_string(i) + " outside 1.." + std::to_string(n));
  DesignRow row{Vector<double>(order + 1), scaling};
  detail::fill_design_row(row.entries.data(), i, n, order, scaling);
  return row;
}

struct FitResult {
  Vector<double> beta_hat;    ///< coefficients in the requested design basis
  Vector<double> residuals;   ///< y_i - x_i^T beta_hat over the segment
  double rss = 0.0;
  int df = 0;                 ///< segment length - (p + 1)
  double var_n = 0.0;         ///< rss / n, n the full series length
  double var_df = 0.0;        ///< rss / df
};

/// Least-squares fit of y_lo..y_hi on the polynomial design.
///
/// The factorization runs on a centered local basis u = (i - mid)/half, which
/// keeps short segments far from the origin well conditioned; the
/// coefficients are mapped back to the requested basis afterwards. The
/// residuals, and hence rss, are basis independent.
inline FitResult fit_segment(std::span<const double> y, int order, int lo, int hi,
                             DesignScaling scaling = DesignScaling::scaled) {
  const int n = static_cast<int>(y.size());
  detail::require(order >= 0, "polynomial order must be non-negative");
  detail::require(lo >= 1 && hi <= n && lo <= hi, "segment outside the series");
  const int len = hi - lo + 1;
  const int m = order + 1;
  detail::require(len >= order + 2, "segment of length " + std::to_string(len) +
                                        " too short for order " + std::to_string(order));

  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  Matrix<double> u(len, m);
  Vector<double> rhs(len);
  for (int r = 0; r < len; ++r) {
    const double t = (lo + r - mid) / half;
    double power = 1.0;
    for (int j = 0; j < m; ++j) {
      u(r, j) = power;
      power *= t;
    }
    rhs(r) = y[static_cast<std::size_t>(lo - 1 + r)];
  }
  Vector<double> colscale(m);
  for (int j = 0; j < m; ++j) {
    colscale(j) = 1.0 / u.col(j).norm();
    u.col(j) *= colscale(j);
  }

  Eigen::ColPivHouseholderQR<Matrix<double>> qr(u);
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  if (diag.minCoeff() <= kRankTolerance * diag.maxCoeff()) {
    throw RankDeficient("segment " + std::to_string(lo) + ".." + std::to_string(hi) +
                        " is numerically rank deficient for order " + std::to_string(order));
  }
  const Vector<double> gamma_scaled = qr.solve(rhs);

  FitResult fit;
  fit.residuals = rhs - u * gamma_scaled;
  fit.rss = fit.residuals.squaredNorm();
  fit.df = len - m;
  fit.var_n = fit.rss / n;
  fit.var_df = fit.rss / fit.df;

  // sum_m gamma_m u^m with u = (v - a)/b, v = w*i, a = w*mid, b = w*half.
  const double w = scaling == DesignScaling::scaled ? 1.0 / n : 1.0;
  const double a = w * mid;
  const double b = w * half;
  const Vector<double> gamma = gamma_scaled.cwiseProduct(colscale);
  fit.beta_hat = Vector<double>::Zero(m);
  for (int mm = 0; mm < m; ++mm) {
    double binom = 1.0;
    const double denom = std::pow(b, mm);
    for (int j = 0; j <= mm; ++j) {
      if (j > 0) binom = binom * (mm - j + 1) / j;
      fit.beta_hat(j) += gamma(mm) * binom * std::pow(-a, mm - j) / denom;
    }
  }
  return fit;
}

inline FitResult fit_segment(const Sample& sample, int lo, int hi,
                             DesignScaling scaling = DesignScaling::scaled) {
  return fit_segment(sample.y(), sample.order(), lo, hi, scaling);
}

/// C_k = sum_{i<=k} x_i x_i^T, its complement over i > k, and C_n, each
/// accumulated directly (so that C_n = C_k + C~_k is a genuine check).
template <class Real = double>
struct GramTriple {
  Matrix<Real> c_k;
  Matrix<Real> c_tilde_k;
  Matrix<Real> c_n;
};

template <class Real = double>
GramTriple<Real> gram_triple(int n, int order, int k, DesignScaling scaling = DesignScaling::scaled) {
  detail::require(order >= 0, "polynomial order must be non-negative");
  detail::require(k >= order + 1 && k <= n - order - 1,
                  "split " + std::to_string(k) + " outside the positive-definite range " +
                      std::to_string(order + 1) + ".." + std::to_string(n - order - 1));
  const int m = order + 1;
  GramTriple<Real> g{Matrix<Real>::Zero(m, m), Matrix<Real>::Zero(m, m), Matrix<Real>::Zero(m, m)};
  Vector<Real> x(m);
  for (int i = 1; i <= n; ++i) {
    detail::fill_design_row<Real>(x.data(), i, n, order, scaling);
    const Matrix<Real> outer = x * x.transpose();
    (i <= k ? g.c_k : g.c_tilde_k) += outer;
    g.c_n += outer;
  }
  return g;
}

/// S_k = sum_{i<=k} x_i (y_i - x_i^T beta_hat_n).
template <class Real = double>
Vector<Real> score_vector(std::span<const double> y, int order, int k, const Vector<Real>& beta_hat_n,
                          DesignScaling scaling = DesignScaling::scaled) {
  const int n = static_cast<int>(y.size());
  detail::require(k >= 1 && k <= n, "split index outside the series");
  detail::require(beta_hat_n.size() == order + 1, "coefficient vector has the wrong length");
  Vector<Real> s = Vector<Real>::Zero(order + 1);
  Vector<Real> x(order + 1);
  for (int i = 1; i <= k; ++i) {
    detail::fill_design_row<Real>(x.data(), i, n, order, scaling);
    const Real resid = Real(y[static_cast<std::size_t>(i - 1)]) - x.dot(beta_hat_n);
    s += x * resid;
  }
  return s;
}

template <class Real = double>
Vector<Real> score_vector(const Sample& sample, int k, const Vector<Real>& beta_hat_n,
                          DesignScaling scaling = DesignScaling::scaled) {
  return score_vector<Real>(sample.y(), sample.order(), k, beta_hat_n, scaling);
}

/// S_k computed without a fitted coefficient vector:
/// sum_{i<=k} x_i y_i - C_k C_n^{-1} sum_{i<=n} x_i y_i.
template <class Real = double>
Vector<Real> score_vector_from_moments(std::span<const double> y, int order, int k,
                                       DesignScaling scaling = DesignScaling::scaled) {
  const int n = static_cast<int>(y.size());
  detail::require(k >= 1 && k <= n, "split index outside the series");
  const int m = order + 1;
  Matrix<Real> c_k = Matrix<Real>::Zero(m, m);
  Matrix<Real> c_n = Matrix<Real>::Zero(m, m);
  Vector<Real> xy_k = Vector<Real>::Zero(m);
  Vector<Real> xy_n = Vector<Real>::Zero(m);
  Vector<Real> x(m);
  for (int i = 1; i <= n; ++i) {
    detail::fill_design_row<Real>(x.data(), i, n, order, scaling);
    const Matrix<Real> outer = x * x.transpose();
    const Vector<Real> xy = x * Real(y[static_cast<std::size_t>(i - 1)]);
    if (i <= k) {
      c_k += outer;
      xy_k += xy;
    }
    c_n += outer;
    xy_n += xy;
  }
  return xy_k - c_k * linalg::spd_solve<Real>(c_n, xy_n);
}

/// S^T (C_k^{-1} + C~_k^{-1}) S, the canonical split quadratic form. Equal to
/// S^T C_k^{-1} C_n C~_k^{-1} S because C_n = C_k + C~_k.
template <class Real = double>
Real split_quadratic_form(const Vector<Real>& s, const GramTriple<Real>& g) {
  return linalg::inverse_quadratic_form<Real>(g.c_k, s) +
         linalg::inverse_quadratic_form<Real>(g.c_tilde_k, s);
}

/// S^T C_k^{-1} C_n C~_k^{-1} S evaluated literally.
template <class Real = double>
Real sandwich_quadratic_form(const Vector<Real>& s, const GramTriple<Real>& g) {
  const Vector<Real> left = linalg::spd_solve<Real>(g.c_k, s);
  const Vector<Real> right = linalg::spd_solve<Real>(g.c_tilde_k, s);
  return left.dot(g.c_n * right);
}

/// Per-split residual sums for every k in [lo, hi] plus the full-sample fit.
struct SplitProfile {
  int n = 0;
  int order = 0;
  int lo = 0;
  int hi = 0;
  FitResult full;
  double centered_ss = 0.0;
  std::vector<double> rss1;  ///< fit on 1..k
  std::vector<double> rss2;  ///< fit on k+1..n
  /// S_k^T (C_k^{-1} + C~_k^{-1}) S_k, evaluated as the squared projections
  /// of the full-sample residuals onto the two segment designs.
  std::vector<double> quad;

  [[nodiscard]] std::size_t index(int k) const { return static_cast<std::size_t>(k - lo); }
};

/// Residual sums for all splits in O(n p^2) via row-updating QR.
///
/// The prefix pass uses powers of i (or i/n); the suffix pass uses powers of
/// n+1-i, which spans the same polynomials but keeps the basis anchored at the
/// segment's own end. Both passes carry y and the full-sample residuals as
/// right-hand sides.
inline SplitProfile split_profile(std::span<const double> y, int order, int lo, int hi,
                                  DesignScaling scaling = DesignScaling::scaled) {
  const int n = static_cast<int>(y.size());
  detail::require(lo >= order + 1 && hi <= n - order - 1 && lo <= hi,
                  "split range " + std::to_string(lo) + ".." + std::to_string(hi) +
                      " invalid for n=" + std::to_string(n) + ", p=" + std::to_string(order));
  const int m = order + 1;
  SplitProfile prof;
  prof.n = n;
  prof.order = order;
  prof.lo = lo;
  prof.hi = hi;
  prof.full = fit_segment(y, order, 1, n, scaling);
  prof.centered_ss = detail::centered_sum_of_squares(y);
  const auto count = static_cast<std::size_t>(hi - lo + 1);
  prof.rss1.assign(count, 0.0);
  prof.rss2.assign(count, 0.0);
  prof.quad.assign(count, 0.0);

  std::vector<double> x(static_cast<std::size_t>(m));
  double rhs[2];

  linalg::IncrementalQr prefix(m, 2);
  for (int i = 1; i <= hi; ++i) {
    detail::fill_design_row(x.data(), i, n, order, scaling);
    rhs[0] = y[static_cast<std::size_t>(i - 1)];
    rhs[1] = prof.full.residuals(i - 1);
    prefix.add_row(x, rhs);
    if (i >= lo) {
      prof.rss1[prof.index(i)] = prefix.rss(0);
      prof.quad[prof.index(i)] = prefix.projection_norm2(1);
    }
  }

  linalg::IncrementalQr suffix(m, 2);
  for (int i = n; i > lo; --i) {
    detail::fill_design_row(x.data(), n + 1 - i, n, order, scaling);
    rhs[0] = y[static_cast<std::size_t>(i - 1)];
    rhs[1] = prof.full.residuals(i - 1);
    suffix.add_row(x, rhs);
    const int k = i - 1;
    if (k <= hi) {
      prof.rss2[prof.index(k)] = suffix.rss(0);
      prof.quad[prof.index(k)] += suffix.projection_norm2(1);
    }
  }
  return prof;
}

inline SplitProfile split_profile(const Sample& sample, int lo, int hi,
                                  DesignScaling scaling = DesignScaling::scaled) {
  return split_profile(sample.y(), sample.order(), lo, hi, scaling);
}

}  // namespace polybreak
