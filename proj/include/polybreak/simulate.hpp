#pragma once

// Seeded data generation under no change / a single change, and the Monte
// Carlo engine behind the empirical size and power studies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "polybreak/asymptotics.hpp"
#include "polybreak/errors.hpp"
#include "polybreak/parallel.hpp"
#include "polybreak/regression.hpp"
#include "polybreak/rng.hpp"
#include "polybreak/scan.hpp"

namespace polybreak {

/// beta_i = beta0 for i <= k*, beta_A afterwards; no beta_A means no change.
struct ChangeModel {
  Vector<double> beta0;
  std::optional<Vector<double>> beta_a;
  int k_star = 0;

  static ChangeModel no_change(Vector<double> beta0) { return {std::move(beta0), std::nullopt, 0}; }
  static ChangeModel single_change(Vector<double> beta0, Vector<double> beta_a, int k_star) {
    return {std::move(beta0), std::move(beta_a), k_star};
  }

  [[nodiscard]] int order() const { return static_cast<int>(beta0.size()) - 1; }
  [[nodiscard]] bool has_change() const { return beta_a.has_value(); }

  void validate(int n) const {
    detail::require(beta0.size() >= 1, "beta0 must have at least one coefficient");
    if (!beta_a) return;
    detail::require(beta_a->size() == beta0.size(), "beta0 and betaA must have the same length");
    detail::require(*beta_a != beta0, "betaA must differ from beta0");
    detail::require(k_star >= 1 && k_star < n, "change point must satisfy 1 <= k* < n");
  }

  [[nodiscard]] const Vector<double>& coefficients_at(int i) const {
    return (beta_a && i > k_star) ? *beta_a : beta0;
  }
};

enum class ErrorKind { iid_normal, student_t, ar1, garch11 };

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::iid_normal: return "iid_normal";
    case ErrorKind::student_t: return "student_t";
    case ErrorKind::ar1: return "ar1";
    case ErrorKind::garch11: return "garch11";
  }
  return "unknown";
}

struct ErrorModel {
  ErrorKind kind = ErrorKind::iid_normal;
  double sigma = 1.0;  ///< normal / Student-t standard deviation, AR(1) innovation sd
  double nu = 5.0;     ///< Student-t degrees of freedom
  double phi = 0.0;    ///< AR(1) coefficient
  double omega = 0.1;  ///< GARCH(1,1) constant
  double arch = 0.1;   ///< GARCH(1,1) coefficient on e_{i-1}^2
  double garch = 0.8;  ///< GARCH(1,1) coefficient on h_{i-1}
  bool unit_variance = false;  ///< rescale to unit stationary variance

  static constexpr int kGarchBurnIn = 200;

  void validate() const {
    switch (kind) {
      case ErrorKind::iid_normal:
        detail::require(sigma > 0.0, "error standard deviation must be positive");
        break;
      case ErrorKind::student_t:
        detail::require(sigma > 0.0, "error standard deviation must be positive");
        detail::require(nu > 2.0, "Student-t errors need nu > 2 for a finite variance");
        break;
      case ErrorKind::ar1:
        detail::require(sigma > 0.0, "innovation standard deviation must be positive");
        detail::require(std::abs(phi) < 1.0, "AR(1) errors need |phi| < 1");
        break;
      case ErrorKind::garch11:
        detail::require(omega > 0.0 && arch >= 0.0 && garch >= 0.0, "GARCH parameters must be non-negative, omega > 0");
        detail::require(arch + garch < 1.0, "GARCH errors need a + b < 1");
        break;
    }
  }

  [[nodiscard]] double stationary_variance() const {
    switch (kind) {
      case ErrorKind::iid_normal:
      case ErrorKind::student_t: return sigma * sigma;
      case ErrorKind::ar1: return sigma * sigma / (1.0 - phi * phi);
      case ErrorKind::garch11: return omega / (1.0 - arch - garch);
    }
    return 1.0;
  }

  std::vector<double> draw(int n, Engine& rng) const {
    validate();
    std::vector<double> e(static_cast<std::size_t>(n));
    std::normal_distribution<double> normal(0.0, 1.0);
    switch (kind) {
      case ErrorKind::iid_normal:
        for (auto& v : e) v = sigma * normal(rng);
        break;
      case ErrorKind::student_t: {
        std::student_t_distribution<double> t(nu);
        const double scale = sigma * std::sqrt((nu - 2.0) / nu);
        for (auto& v : e) v = scale * t(rng);
        break;
      }
      case ErrorKind::ar1: {
        double prev = std::sqrt(stationary_variance()) * normal(rng);
        for (auto& v : e) {
          prev = phi * prev + sigma * normal(rng);
          v = prev;
        }
        break;
      }
      case ErrorKind::garch11: {
        double h = stationary_variance();
        double prev = 0.0;
        for (int i = -kGarchBurnIn; i < n; ++i) {
          h = omega + arch * prev * prev + garch * h;
          prev = std::sqrt(h) * normal(rng);
          if (i >= 0) e[static_cast<std::size_t>(i)] = prev;
        }
        break;
      }
    }
    if (unit_variance) {
      const double s = 1.0 / std::sqrt(stationary_variance());
      for (auto& v : e) v *= s;
    }
    return e;
  }
};

/// y_i = x_i^T beta(i) + e_i with x_i = (1, i/n, ..., (i/n)^p).
inline Sample generate(int n, const ChangeModel& model, const ErrorModel& errors, Engine& rng) {
  model.validate(n);
  errors.validate();
  const int p = model.order();
  std::vector<double> y = errors.draw(n, rng);
  std::vector<double> x(static_cast<std::size_t>(p + 1));
  for (int i = 1; i <= n; ++i) {
    detail::fill_design_row(x.data(), i, n, p, DesignScaling::scaled);
    const auto& beta = model.coefficients_at(i);
    double mean = 0.0;
    for (int j = 0; j <= p; ++j) mean += x[static_cast<std::size_t>(j)] * beta(j);
    y[static_cast<std::size_t>(i - 1)] += mean;
  }
  return Sample(std::move(y), p);
}

inline Sample generate(int n, const ChangeModel& model, const ErrorModel& errors, std::uint64_t seed) {
  Engine rng = derive_stream(seed, {});
  return generate(n, model, errors, rng);
}

struct SimConfig {
  int reps = 1000;
  std::vector<int> n_list;
  int order = 1;
  double gamma = 0.0;
  bool gamma_calibrated = true;
  ChangeModel change;
  /// When positive, k* = n / k_star_divisor for every n; otherwise change.k_star.
  int k_star_divisor = 0;
  ErrorModel errors;
  std::vector<double> alphas{0.10, 0.05};
  RangeSpec range;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  [[nodiscard]] int k_star_for(int n) const { return k_star_divisor > 0 ? n / k_star_divisor : change.k_star; }

  void validate() const {
    detail::require(reps >= 1, "reps must be positive");
    detail::require(!n_list.empty(), "n_list must not be empty");
    detail::require(order >= 0, "polynomial order must be non-negative");
    detail::require(change.order() == order, "beta0 length must equal order + 1");
    detail::require(!alphas.empty(), "alphas must not be empty");
    detail::require(k_star_divisor >= 0, "k_star divisor must be non-negative");
    errors.validate();
    for (int n : n_list) {
      detail::require(n >= 2 * order + 6, "sample size " + std::to_string(n) + " too small for the order");
      ChangeModel m = change;
      m.k_star = k_star_for(n);
      m.validate(n);
      (void)ScanRange::resolve(range, n, order);
      for (double a : alphas) CriticalValueSpec{n, order, gamma, a}.validate();
    }
  }
};

struct SimCell {
  double alpha = 0.0;
  double critical_value = 0.0;
  int rejections = 0;
  double rate_pct = 0.0;
  double mc_se_pct = 0.0;  ///< sqrt(r(1-r)/reps) * 100
};

struct SimRow {
  int n = 0;
  int k_star = 0;      ///< 0 under no change
  int valid_reps = 0;
  int degenerate = 0;  ///< replications whose fit was exactly polynomial
  double mean_k_hat = 0.0;
  double median_k_hat = 0.0;
  std::vector<SimCell> cells;
};

struct SimReport {
  std::string study;  ///< "size" or "power"
  SimConfig config;
  std::vector<SimRow> rows;
};

namespace detail {

struct RepOutcome {
  bool ok = false;
  double statistic = 0.0;
  int k_hat = 0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline SimReport run_study(const SimConfig& config, std::string study) {
  config.validate();
  const auto reps = static_cast<std::size_t>(config.reps);
  const std::size_t cells = config.n_list.size();
  std::vector<RepOutcome> outcomes(cells * reps);

  parallel_for(outcomes.size(), config.threads, [&](std::size_t task) {
    const std::size_t cell = task / reps;
    const std::size_t rep = task % reps;
    const int n = config.n_list[cell];
    ChangeModel model = config.change;
    model.k_star = config.k_star_for(n);
    Engine rng = derive_stream(config.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
    const Sample sample = generate(n, model, config.errors, rng);
    try {
      const ScanResult res = t_hat(sample, ScanRange::resolve(config.range, n, config.order));
      outcomes[task] = {true, res.statistic, res.k_hat};
    } catch (const DegenerateFit&) {
      outcomes[task] = {false, 0.0, 0};
    }
  });

  SimReport report;
  report.study = std::move(study);
  report.config = config;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const int n = config.n_list[cell];
    SimRow row;
    row.n = n;
    row.k_star = config.change.has_change() ? config.k_star_for(n) : 0;
    std::vector<double> stats;
    std::vector<double> k_hats;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto& o = outcomes[cell * reps + rep];
      if (!o.ok) {
        ++row.degenerate;
        continue;
      }
      stats.push_back(o.statistic);
      k_hats.push_back(o.k_hat);
    }
    row.valid_reps = static_cast<int>(stats.size());
    if (!k_hats.empty()) {
      double sum = 0.0;
      for (double k : k_hats) sum += k;
      row.mean_k_hat = sum / static_cast<double>(k_hats.size());
      row.median_k_hat = median_of(k_hats);
    }
    for (double alpha : config.alphas) {
      SimCell c;
      c.alpha = alpha;
      c.critical_value = critical_value({n, config.order, config.gamma, alpha});
      c.rejections = static_cast<int>(
          std::count_if(stats.begin(), stats.end(), [&](double t) { return t > c.critical_value; }));
      if (row.valid_reps > 0) {
        const double r = static_cast<double>(c.rejections) / row.valid_reps;
        c.rate_pct = 100.0 * r;
        c.mc_se_pct = 100.0 * std::sqrt(r * (1.0 - r) / row.valid_reps);
      }
      row.cells.push_back(c);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace detail

/// Empirical size: rejection frequencies of t_hat > c(n, alpha) with no change.
inline SimReport run_size(const SimConfig& config) {
  detail::require(!config.change.has_change(), "a size study needs a model without betaA");
  return detail::run_study(config, "size");
}

/// Empirical power under a single change, with a k_hat summary per n.
inline SimReport run_power(const SimConfig& config) {
  detail::require(config.change.has_change(), "a power study needs betaA and a change point");
  return detail::run_study(config, "power");
}

struct ScatterPoint {
  double x = 0.0;  ///< i/n
  double y = 0.0;
  int regime = 0;  ///< 0 up to k*, 1 afterwards
};

/// (i/n, y_i, regime) triples for external plotting.
inline std::vector<ScatterPoint> scatter_dump(const Sample& sample, const ChangeModel& model) {
  const int n = sample.size();
  std::vector<ScatterPoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const int regime = (model.has_change() && i > model.k_star) ? 1 : 0;
    out.push_back({static_cast<double>(i) / n, sample.y()[static_cast<std::size_t>(i - 1)], regime});
  }
  return out;
}

}  // namespace polybreak
