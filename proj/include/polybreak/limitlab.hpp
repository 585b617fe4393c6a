#pragma once

// Simulation of the Gaussian limit objects of the change-point statistics.
//
// Gamma(t) = (int_0^t x^i dW(x))_{i=0..p} is a Gaussian process with
// independent increments; the normalised Legendre process
//   qhat_i(t) = int_0^t g_{i,t} dW / ||g_{i,t}||,
// with g_{i,t} the monic Legendre polynomial of degree i on [0, t], is a
// linear function of Gamma(t). Paths are sampled exactly on a grid: on each
// cell [s, s+h] the local moments int u^j dW, u = (x - c)/(h/2), are drawn from
// their (well conditioned) joint normal law and mapped back to powers of x.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "polybreak/asymptotics.hpp"
#include "polybreak/empirical.hpp"
#include "polybreak/errors.hpp"
#include "polybreak/linalg.hpp"
#include "polybreak/parallel.hpp"
#include "polybreak/rng.hpp"

namespace polybreak {

inline constexpr int kMaxLimitOrder = 6;

struct Rational {
  long long num = 0;
  long long den = 1;
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

namespace detail {

inline long long factorial(int k) {
  long long f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

inline long long binomial(int n, int k) {
  long long b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

inline Rational reduced(long long num, long long den) {
  const long long g = std::gcd(num < 0 ? -num : num, den);
  return {num / g, den / g};
}

inline void require_limit_order(int order) {
  require(order >= 0 && order <= kMaxLimitOrder,
          "Legendre order must lie in 0.." + std::to_string(kMaxLimitOrder));
}

}  // namespace detail

/// Exact coefficients (of x^0..x^i) of the monic Legendre polynomial of
/// degree i on [0, 1]:
///   (i!)^2/(2i)! * sum_k (-1)^{i+k} C(i,k) C(i+k,k) x^k.
inline std::vector<Rational> legendre_monic_exact(int i) {
  detail::require_limit_order(i);
  const long long scale = detail::factorial(i) * detail::factorial(i);
  const long long den = detail::factorial(2 * i);
  std::vector<Rational> c;
  for (int k = 0; k <= i; ++k) {
    const long long sign = (i + k) % 2 == 0 ? 1 : -1;
    c.push_back(detail::reduced(sign * detail::binomial(i, k) * detail::binomial(i + k, k) * scale, den));
  }
  return c;
}

inline std::vector<double> legendre_monic(int i) {
  std::vector<double> c;
  for (const auto& r : legendre_monic_exact(i)) c.push_back(r.value());
  return c;
}

/// int_0^1 g_{i,1}^2 dx = (i!)^4 / ((2i)!^2 (2i+1)).
inline double legendre_norm2_unit(int i) {
  detail::require_limit_order(i);
  const double f = static_cast<double>(detail::factorial(i));
  const double f2 = static_cast<double>(detail::factorial(2 * i));
  return f * f * f * f / (f2 * f2 * (2.0 * i + 1.0));
}

/// Monic Legendre polynomials g_{i,t}(x) = t^i g_{i,1}(x/t) on [0, t], i <= p.
class LimitBasis {
 public:
  explicit LimitBasis(int order) : order_(order) {
    detail::require_limit_order(order);
    for (int i = 0; i <= order; ++i) {
      coeffs_.push_back(legendre_monic(i));
      norm2_.push_back(legendre_norm2_unit(i));
    }
  }

  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] const std::vector<double>& coefficients(int i) const { return coeffs_.at(static_cast<std::size_t>(i)); }

  /// ||g_{i,t}||^2 = t^{2i+1} ||g_{i,1}||^2.
  [[nodiscard]] double norm2(int i, double t) const {
    return std::pow(t, 2 * i + 1) * norm2_.at(static_cast<std::size_t>(i));
  }

  [[nodiscard]] double evaluate(int i, double t, double x) const {
    const auto& c = coefficients(i);
    const double u = x / t;
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
    return std::pow(t, i) * acc;
  }

  /// qhat(t) from Gamma(t): qhat_i = sum_j c_ij t^{i-j} Gamma_j / ||g_{i,t}||.
  [[nodiscard]] Vector<double> qhat(double t, const Vector<double>& gamma) const {
    Vector<double> q(order_ + 1);
    for (int i = 0; i <= order_; ++i) {
      const auto& c = coeffs_[static_cast<std::size_t>(i)];
      double acc = 0.0;
      double tp = 1.0;  // t^{i-j}, j descending
      for (int j = i; j >= 0; --j) {
        acc += c[static_cast<std::size_t>(j)] * tp * gamma(j);
        tp *= t;
      }
      q(i) = acc / std::sqrt(norm2(i, t));
    }
    return q;
  }

 private:
  int order_;
  std::vector<std::vector<double>> coeffs_;
  std::vector<double> norm2_;
};

/// C(t) = (int_0^t x^{i+j} dx), C~(t) = (int_t^1 x^{i+j} dx).
struct LimitMatrices {
  Matrix<double> c;
  Matrix<double> c_tilde;
  Matrix<double> c_one;
};

inline LimitMatrices limit_matrices(int order, double t) {
  detail::require(order >= 0, "order must be non-negative");
  detail::require(t >= 0.0 && t <= 1.0, "t must lie in [0, 1]");
  const int m = order + 1;
  LimitMatrices lm{Matrix<double>(m, m), Matrix<double>(m, m), Matrix<double>(m, m)};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double e = i + j + 1.0;
      lm.c(i, j) = std::pow(t, e) / e;
      lm.c_one(i, j) = 1.0 / e;
      lm.c_tilde(i, j) = -std::expm1(e * std::log(t)) / e;
    }
  }
  if (t == 0.0) lm.c_tilde = lm.c_one;
  return lm;
}

enum class GridKind {
  uniform,    ///< steps_per_unit points per unit of t
  geometric,  ///< steps_per_unit points per unit of log t
  integer,    ///< the integers in [t_lo, t_hi]
};

struct PathConfig {
  int steps_per_unit = 1000;
  GridKind grid = GridKind::geometric;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

inline constexpr int kMinGridPoints = 100;

/// Grid points in [t_lo, t_hi] (both included for uniform and geometric).
inline std::vector<double> make_grid(double t_lo, double t_hi, const PathConfig& path) {
  detail::require(t_lo > 0.0 && t_lo < t_hi, "need 0 < t_lo < t_hi");
  detail::require(path.steps_per_unit >= 1, "steps_per_unit must be positive");
  std::vector<double> grid;
  switch (path.grid) {
    case GridKind::uniform: {
      const auto cells = static_cast<long>(std::ceil((t_hi - t_lo) * path.steps_per_unit - 1e-9));
      for (long j = 0; j <= cells; ++j) grid.push_back(t_lo + (t_hi - t_lo) * static_cast<double>(j) / static_cast<double>(cells));
      break;
    }
    case GridKind::geometric: {
      const double span = std::log(t_hi / t_lo);
      const auto cells = static_cast<long>(std::ceil(span * path.steps_per_unit - 1e-9));
      for (long j = 0; j <= cells; ++j) grid.push_back(t_lo * std::exp(span * static_cast<double>(j) / static_cast<double>(cells)));
      grid.back() = t_hi;
      break;
    }
    case GridKind::integer: {
      for (double t = std::ceil(t_lo); t <= t_hi; t += 1.0) grid.push_back(t);
      break;
    }
  }
  if (static_cast<int>(grid.size()) < kMinGridPoints) {
    throw InvalidArgument("grid too coarse: " + std::to_string(grid.size()) + " points in [t_lo, t_hi], need " +
                          std::to_string(kMinGridPoints));
  }
  return grid;
}

/// Exact sampler of Gamma(t) along an increasing grid.
class PolyIntegralWalker {
 public:
  explicit PolyIntegralWalker(int order) : order_(order), gamma_(Vector<double>::Zero(order + 1)) {
    detail::require(order >= 0 && order <= kMaxLimitOrder, "order out of range");
    const int m = order + 1;
    // Moments of u on [-1, 1]; covariance of int u^j dW over a cell is (h/2) K.
    Matrix<double> k(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) k(i, j) = (i + j) % 2 == 0 ? 2.0 / (i + j + 1.0) : 0.0;
    }
    chol_ = Eigen::LLT<Matrix<double>>(k).matrixL();
    binom_ = Matrix<double>::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j <= i; ++j) binom_(i, j) = static_cast<double>(detail::binomial(i, j));
    }
  }

  /// Restarts at Gamma(0) = 0.
  void reset() {
    gamma_.setZero();
    t_ = 0.0;
  }

  /// Advances to time t > current time, drawing the exact increment.
  void advance(double t, Engine& rng) {
    detail::require(t > t_, "grid must be increasing");
    const int m = order_ + 1;
    const double h = t - t_;
    const double c = 0.5 * (t + t_);
    Vector<double> z(m);
    for (int j = 0; j < m; ++j) z(j) = normal_(rng);
    const Vector<double> local = std::sqrt(0.5 * h) * (chol_ * z);
    // x^i = sum_j C(i,j) c^{i-j} (h/2)^j u^j
    for (int i = 0; i < m; ++i) {
      double inc = 0.0;
      double half_pow = 1.0;
      for (int j = 0; j <= i; ++j) {
        inc += binom_(i, j) * std::pow(c, i - j) * half_pow * local(j);
        half_pow *= 0.5 * h;
      }
      gamma_(i) += inc;
    }
    t_ = t;
  }

  [[nodiscard]] const Vector<double>& gamma() const { return gamma_; }
  [[nodiscard]] double time() const { return t_; }

 private:
  int order_;
  double t_ = 0.0;
  Vector<double> gamma_;
  Matrix<double> chol_;
  Matrix<double> binom_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// One realisation of sup_{t in grid} qhat(t)^T qhat(t) over [t_lo, t_hi].
inline double simulate_qhat_sup(int order, double t_lo, double t_hi, const PathConfig& path, Engine& rng) {
  const LimitBasis basis(order);
  const auto grid = make_grid(t_lo, t_hi, path);
  PolyIntegralWalker walker(order);
  double sup = 0.0;
  for (double t : grid) {
    walker.advance(t, rng);
    sup = std::max(sup, basis.qhat(t, walker.gamma()).squaredNorm());
  }
  return sup;
}

inline double simulate_qhat_sup(int order, double t_lo, double t_hi, const PathConfig& path) {
  Engine rng = derive_stream(path.seed, {0x71686174ULL, static_cast<std::uint64_t>(order)});
  return simulate_qhat_sup(order, t_lo, t_hi, path, rng);
}

/// Contributing range a(n) = (log n)^alpha, b(n) = n / (log n)^beta.
struct ContributingRange {
  double a = 0.0;
  double b = 0.0;
  static ContributingRange of(double n, double alpha_exp = 1.0, double beta_exp = 1.0) {
    detail::require(n > std::exp(1.0), "n must exceed e");
    detail::require(alpha_exp > 0.0 && beta_exp > 0.0, "range exponents must be positive");
    const double ln = std::log(n);
    return {std::pow(ln, alpha_exp), n / std::pow(ln, beta_exp)};
  }
};

struct IndependenceCheck {
  double threshold = 0.0;
  double cdf_max = 0.0;         ///< empirical P(max(xi1, xi2) <= c)
  double cdf_single_sq = 0.0;   ///< empirical P(xi <= c)^2 from the pooled halves
  double std_error = 0.0;
};

struct GumbelCheck {
  int order = 0;
  double n_effective = 0.0;
  int reps = 0;
  ContributingRange range;
  double location = 0.0;                 ///< g(n, p, 0)
  std::vector<double> xi1;
  std::vector<double> xi2;
  std::vector<double> recentred_max;     ///< max(xi1, xi2) - location
  double ks_distance = 0.0;              ///< recentred max vs exp(-2 e^{-x/2})
  double ks_distance_half = 0.0;         ///< recentred xi1 vs exp(-e^{-x/2})
  double empirical_median = 0.0;
  double limit_median = 0.0;
  std::vector<IndependenceCheck> independence;
};

/// Simulates the two independent half-sample suprema over [a(n), b(n)] and
/// compares the recentred maximum with the double-exponential limit.
inline GumbelCheck gumbel_check(int order, double n_effective, int reps, const PathConfig& path,
                                double alpha_exp = 1.0, double beta_exp = 1.0) {
  detail::require(reps >= 1000, "gumbel_check needs at least 1000 replications");
  GumbelCheck out;
  out.order = order;
  out.n_effective = n_effective;
  out.reps = reps;
  out.range = ContributingRange::of(n_effective, alpha_exp, beta_exp);
  out.location = correction_g(static_cast<int>(std::lround(n_effective)), order, 0.0);
  (void)make_grid(out.range.a, out.range.b, path);

  const auto count = static_cast<std::size_t>(reps);
  out.xi1.assign(count, 0.0);
  out.xi2.assign(count, 0.0);
  const auto n_tag = static_cast<std::uint64_t>(std::llround(n_effective));
  parallel_for(2 * count, path.threads, [&](std::size_t task) {
    const std::size_t rep = task / 2;
    const std::uint64_t half = task % 2;
    Engine rng = derive_stream(path.seed, {0x67756d62ULL, static_cast<std::uint64_t>(order), n_tag, rep, half});
    const double xi = simulate_qhat_sup(order, out.range.a, out.range.b, path, rng);
    (half == 0 ? out.xi1 : out.xi2)[rep] = xi;
  });

  std::vector<double> half_recentred;
  for (std::size_t r = 0; r < count; ++r) {
    out.recentred_max.push_back(std::max(out.xi1[r], out.xi2[r]) - out.location);
    half_recentred.push_back(out.xi1[r] - out.location);
  }
  out.ks_distance = ks_distance(out.recentred_max, limit_cdf);
  out.ks_distance_half = ks_distance(half_recentred, half_limit_cdf);
  std::vector<double> sorted = out.recentred_max;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = count / 2;
  out.empirical_median = count % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  out.limit_median = limit_quantile(0.5);

  std::vector<double> pooled = out.xi1;
  pooled.insert(pooled.end(), out.xi2.begin(), out.xi2.end());
  std::vector<double> maxima;
  for (std::size_t r = 0; r < count; ++r) maxima.push_back(std::max(out.xi1[r], out.xi2[r]));
  std::vector<double> pooled_sorted = pooled;
  std::sort(pooled_sorted.begin(), pooled_sorted.end());
  for (double level : {0.25, 0.5, 0.75, 0.9}) {
    IndependenceCheck chk;
    chk.threshold = quantile_sorted(pooled_sorted, level).value;
    const double f = empirical_cdf(pooled, chk.threshold);
    chk.cdf_max = empirical_cdf(maxima, chk.threshold);
    chk.cdf_single_sq = f * f;
    const double var_max = chk.cdf_single_sq * (1.0 - chk.cdf_single_sq) / reps;
    const double var_sq = 4.0 * f * f * f * (1.0 - f) / (2.0 * reps);
    chk.std_error = std::sqrt(var_max + var_sq);
    out.independence.push_back(chk);
  }
  return out;
}

/// max_{a <= k <= b} s_k^T D_k^{-1} s_k with s_{k,i} = sum_{j<=k} j^i e_j and
/// D_k = sum_{j<=k} (j^{i+l}); e_j iid standard normal. Computed in the
/// equivalent i/n scaling v_k^T C_k^{-1} v_k.
inline double discrete_sup_oracle(int order, int n, double a, double b, Engine& rng) {
  detail::require(n >= 100, "discrete supremum needs n >= 100");
  detail::require(order >= 0 && order <= kMaxLimitOrder, "order out of range");
  const int k_lo = std::max(static_cast<int>(std::ceil(a)), order + 1);
  const int k_hi = std::min(static_cast<int>(std::floor(b)), n);
  detail::require(k_lo <= k_hi, "empty index range");
  const int m = order + 1;
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<double> c = Matrix<double>::Zero(m, m);
  Vector<double> v = Vector<double>::Zero(m);
  Vector<double> x(m);
  double best = 0.0;
  for (int j = 1; j <= k_hi; ++j) {
    const double e = normal(rng);
    const double base = static_cast<double>(j) / n;
    double pw = 1.0;
    for (int i = 0; i < m; ++i) {
      x(i) = pw;
      pw *= base;
    }
    c += x * x.transpose();
    v += x * e;
    if (j >= k_lo) best = std::max(best, linalg::inverse_quadratic_form<double>(c, v));
  }
  return best;
}

inline double discrete_sup_oracle(int order, int n, double a, double b, std::uint64_t seed) {
  Engine rng = derive_stream(seed, {0x64697363ULL, static_cast<std::uint64_t>(order), static_cast<std::uint64_t>(n)});
  return discrete_sup_oracle(order, n, a, b, rng);
}

inline const std::vector<double>& trimmed_quantile_levels() {
  static const std::vector<double> levels{0.90, 0.95, 0.99};
  return levels;
}

struct TrimmedLimitTable {
  int order = 0;
  double delta = 0.0;
  int reps = 0;
  int steps_per_unit = 0;
  std::uint64_t seed = 0;
  std::vector<QuantileEstimate> quantiles;
  std::vector<double> draws;  ///< one supremum per replication
};

/// Quantiles of sup_{delta <= t <= 1-delta} Delta(t)^T C^{-1}(t) C(1) C~^{-1}(t) Delta(t),
/// Delta(t) = Gamma(t) - C(t) C^{-1}(1) Gamma(1), on a uniform grid of [0, 1].
/// Replication r uses the same path for every delta, so tables for several
/// trimming fractions are coupled.
inline TrimmedLimitTable simulate_trimmed_limit(int order, double delta, int reps, const PathConfig& path) {
  detail::require(delta > 0.0 && delta < 0.5, "trimming fraction must lie in (0, 1/2)");
  detail::require(reps >= 1, "reps must be positive");
  detail::require(order >= 0 && order <= kMaxLimitOrder, "order out of range");
  const int m = path.steps_per_unit;
  detail::require(m >= 1, "steps_per_unit must be positive");
  const int j_lo = static_cast<int>(std::ceil(delta * m - 1e-9));
  const int j_hi = static_cast<int>(std::floor((1.0 - delta) * m + 1e-9));
  detail::require(j_lo >= 1 && j_lo <= j_hi, "grid has no points in [delta, 1 - delta]");

  const LimitMatrices at_one = limit_matrices(order, 1.0);
  struct Weights {
    Matrix<double> proj;  // C(t) C(1)^{-1}
    Matrix<double> form;  // C(t)^{-1} + C~(t)^{-1}
  };
  std::vector<Weights> weights;
  const Matrix<double> c_one_inv = at_one.c_one.inverse();
  for (int j = j_lo; j <= j_hi; ++j) {
    const LimitMatrices lm = limit_matrices(order, static_cast<double>(j) / m);
    weights.push_back({lm.c * c_one_inv, lm.c.inverse() + lm.c_tilde.inverse()});
  }

  TrimmedLimitTable table;
  table.order = order;
  table.delta = delta;
  table.reps = reps;
  table.steps_per_unit = m;
  table.seed = path.seed;
  table.draws.assign(static_cast<std::size_t>(reps), 0.0);
  parallel_for(static_cast<std::size_t>(reps), path.threads, [&](std::size_t rep) {
    Engine rng = derive_stream(path.seed, {0x7472696dULL, static_cast<std::uint64_t>(order),
                                           static_cast<std::uint64_t>(m), rep});
    PolyIntegralWalker walker(order);
    std::vector<Vector<double>> gammas;
    gammas.reserve(static_cast<std::size_t>(j_hi - j_lo + 1));
    for (int j = 1; j <= m; ++j) {
      walker.advance(static_cast<double>(j) / m, rng);
      if (j >= j_lo && j <= j_hi) gammas.push_back(walker.gamma());
    }
    const Vector<double> gamma_one = walker.gamma();
    double sup = 0.0;
    for (std::size_t w = 0; w < gammas.size(); ++w) {
      const Vector<double> d = gammas[w] - weights[w].proj * gamma_one;
      sup = std::max(sup, d.dot(weights[w].form * d));
    }
    table.draws[rep] = sup;
  });
  table.quantiles = quantiles(table.draws, trimmed_quantile_levels());
  return table;
}

}  // namespace polybreak
