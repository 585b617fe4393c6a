#pragma once

// Reference computations that share no code path with the library: normal
// equations in 50-digit floating point, exact rational Gram-Schmidt, and a
// direct Brownian-bridge simulation.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "polybreak/empirical.hpp"
#include "polybreak/rng.hpp"

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;
using Rational = boost::multiprecision::cpp_rational;

/// Solves a x = b by Gaussian elimination with partial pivoting.
template <class T>
std::vector<T> gauss_solve(std::vector<std::vector<T>> a, std::vector<T> b) {
  const std::size_t m = b.size();
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const T f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < m; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<T> x(m);
  for (std::size_t i = m; i-- > 0;) {
    T acc = b[i];
    for (std::size_t c = i + 1; c < m; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

/// Residual sum of squares of the degree-p fit of y_lo..y_hi (1-based) on
/// powers of i/n, via normal equations.
inline Big rss(std::span<const double> y, int p, int lo, int hi) {
  const int n = static_cast<int>(y.size());
  const auto m = static_cast<std::size_t>(p + 1);
  std::vector<std::vector<Big>> g(m, std::vector<Big>(m, Big(0)));
  std::vector<Big> rhs(m, Big(0));
  std::vector<Big> x(m);
  auto row = [&](int i) {
    const Big t = Big(i) / Big(n);
    Big pw = 1;
    for (std::size_t j = 0; j < m; ++j) {
      x[j] = pw;
      pw *= t;
    }
  };
  for (int i = lo; i <= hi; ++i) {
    row(i);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) g[a][b] += x[a] * x[b];
      rhs[a] += x[a] * Big(y[static_cast<std::size_t>(i - 1)]);
    }
  }
  const auto beta = gauss_solve(g, rhs);
  Big s = 0;
  for (int i = lo; i <= hi; ++i) {
    row(i);
    Big r = Big(y[static_cast<std::size_t>(i - 1)]);
    for (std::size_t j = 0; j < m; ++j) r -= x[j] * beta[j];
    s += r * r;
  }
  return s;
}

struct ScanOracle {
  double statistic = 0.0;
  int k_hat = 0;
};

/// -n [min_k log(RSS1 + RSS2) - log RSS] by refitting every split.
inline ScanOracle t_hat(std::span<const double> y, int p, int lo, int hi) {
  const int n = static_cast<int>(y.size());
  const Big full = rss(y, p, 1, n);
  Big best = -1;
  int k_best = lo;
  for (int k = lo; k <= hi; ++k) {
    const Big split = rss(y, p, 1, k) + rss(y, p, k + 1, n);
    if (best < 0 || split < best) {
      best = split;
      k_best = k;
    }
  }
  const Big stat = -Big(n) * log(best / full);
  return {static_cast<double>(stat), k_best};
}

/// Monic orthogonal polynomials on [0, 1] by Gram-Schmidt on 1, x, x^2, ...
/// with exact rational arithmetic. Returns coefficients of x^0..x^i.
inline std::vector<std::vector<Rational>> gram_schmidt_monic(int max_order) {
  auto inner = [](const std::vector<Rational>& a, const std::vector<Rational>& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) s += a[i] * b[j] / Rational(static_cast<long long>(i + j + 1));
    }
    return s;
  };
  std::vector<std::vector<Rational>> basis;
  for (int d = 0; d <= max_order; ++d) {
    std::vector<Rational> v(static_cast<std::size_t>(d + 1), Rational(0));
    v.back() = 1;
    for (const auto& q : basis) {
      const Rational f = inner(v, q) / inner(q, q);
      for (std::size_t i = 0; i < q.size(); ++i) v[i] -= f * q[i];
    }
    basis.push_back(v);
  }
  return basis;
}

/// sup over grid points t in [delta, 1 - delta] of B(t)^2 / (t (1 - t)) for a
/// Brownian bridge B(t) = W(t) - t W(1), W built from Gaussian increments.
inline std::vector<double> bridge_sup_sample(double delta, int reps, int steps, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(reps));
  std::vector<double> w(static_cast<std::size_t>(steps + 1));
  for (int r = 0; r < reps; ++r) {
    polybreak::Engine rng = polybreak::derive_stream(seed, {0xb41d6eULL, static_cast<std::uint64_t>(r)});
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(1.0 / steps);
    w[0] = 0.0;
    for (int j = 1; j <= steps; ++j) w[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j - 1)] + sd * normal(rng);
    const double w1 = w.back();
    double sup = 0.0;
    for (int j = 1; j < steps; ++j) {
      const double t = static_cast<double>(j) / steps;
      if (t < delta - 1e-12 || t > 1.0 - delta + 1e-12) continue;
      const double b = w[static_cast<std::size_t>(j)] - t * w1;
      sup = std::max(sup, b * b / (t * (1.0 - t)));
    }
    out.push_back(sup);
  }
  return out;
}

}  // namespace oracle
