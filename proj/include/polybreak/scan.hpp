#pragma once

// Maximally selected likelihood-ratio scans over the split point k.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "polybreak/errors.hpp"
#include "polybreak/regression.hpp"

namespace polybreak {

enum class RangeMode {
  paper_default,  ///< p+2 .. n-p-2
  bare,           ///< p+1 .. n-p-1
  trimmed,        ///< floor(n*delta) .. n - floor(n*delta)
};

/// How to choose the scan range for a series of unknown length.
struct RangeSpec {
  RangeMode mode = RangeMode::paper_default;
  double delta = 0.0;  ///< only used by RangeMode::trimmed
};

struct ScanRange {
  int lo = 0;
  int hi = 0;
  RangeMode mode = RangeMode::paper_default;
  double delta = 0.0;

  static ScanRange paper_default(int n, int order) {
    return checked({order + 2, n - order - 2, RangeMode::paper_default, 0.0}, n, order);
  }
  static ScanRange bare(int n, int order) {
    return checked({order + 1, n - order - 1, RangeMode::bare, 0.0}, n, order);
  }
  static ScanRange trimmed(int n, int order, double delta) {
    detail::require(delta > 0.0 && delta < 0.5, "trimming fraction must lie in (0, 1/2)");
    const int cut = static_cast<int>(std::floor(n * delta));
    detail::require(cut >= order + 2, "trimming fraction " + std::to_string(delta) +
                                          " leaves fewer than p+2 points at the ends");
    return checked({cut, n - cut, RangeMode::trimmed, delta}, n, order);
  }
  static ScanRange resolve(const RangeSpec& spec, int n, int order) {
    switch (spec.mode) {
      case RangeMode::bare: return bare(n, order);
      case RangeMode::trimmed: return trimmed(n, order, spec.delta);
      case RangeMode::paper_default: break;
    }
    return paper_default(n, order);
  }

  /// Throws unless lo <= hi and both segments stay estimable.
  void validate(int n, int order) const { (void)checked(*this, n, order); }

  [[nodiscard]] int size() const { return hi - lo + 1; }

 private:
  static ScanRange checked(ScanRange r, int n, int order) {
    detail::require(r.lo >= order + 1 && r.hi <= n - order - 1,
                    "scan range " + std::to_string(r.lo) + ".." + std::to_string(r.hi) +
                        " leaves a segment with fewer than p+1 points");
    detail::require(r.lo <= r.hi, "scan range is empty");
    return r;
  }
};

enum class Variant { t_hat, t_known_sigma, t1, t2, t3, t_delta };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::t_hat: return "t_hat";
    case Variant::t_known_sigma: return "t_known_sigma";
    case Variant::t1: return "t1";
    case Variant::t2: return "t2";
    case Variant::t3: return "t3";
    case Variant::t_delta: return "t_delta";
  }
  return "unknown";
}

struct ScanPoint {
  int k = 0;
  double rss1 = 0.0;
  double rss2 = 0.0;
  double quad_form = 0.0;  ///< S_k^T C_k^{-1} C_n C~_k^{-1} S_k
  /// The per-k quantity whose extremum defines the statistic: log(rss1+rss2)
  /// (minimised) for t_hat, the normalised quadratic form (maximised) otherwise.
  double criterion = 0.0;
};

struct ScanResult {
  std::vector<ScanPoint> per_k;
  int k_hat = 0;
  double statistic = 0.0;
  Variant variant = Variant::t_hat;
  double rss_full = 0.0;
};

namespace detail {

inline SplitProfile profile_for(const Sample& sample, const ScanRange& range, DesignScaling scaling) {
  range.validate(sample.size(), sample.order());
  return split_profile(sample, range.lo, range.hi, scaling);
}

inline void require_nondegenerate_full(const SplitProfile& prof) {
  if (negligible_rss(prof.full.rss, prof.centered_ss)) {
    throw DegenerateFit("full-sample residual sum is zero: the series is exactly polynomial");
  }
}

inline std::vector<ScanPoint> points_from(const SplitProfile& prof) {
  std::vector<ScanPoint> pts;
  pts.reserve(prof.rss1.size());
  for (int k = prof.lo; k <= prof.hi; ++k) {
    const auto ix = prof.index(k);
    pts.push_back({k, prof.rss1[ix], prof.rss2[ix], prof.quad[ix], 0.0});
  }
  return pts;
}

// Ties resolve to the smallest k.
inline ScanResult finish_max(std::vector<ScanPoint> pts, Variant variant, double rss_full) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].criterion > pts[best].criterion) best = i;
  }
  ScanResult res;
  res.k_hat = pts[best].k;
  res.statistic = pts[best].criterion;
  res.variant = variant;
  res.rss_full = rss_full;
  res.per_k = std::move(pts);
  return res;
}

}  // namespace detail

/// Log-likelihood-ratio statistic with estimated variance:
///   -n [ min_k log(RSS1(k) + RSS2(k)) - log RSS ],
/// with exact residual sums. k_hat is the minimising split.
inline ScanResult t_hat(const Sample& sample, const ScanRange& range,
                        DesignScaling scaling = DesignScaling::scaled) {
  const SplitProfile prof = detail::profile_for(sample, range, scaling);
  detail::require_nondegenerate_full(prof);
  auto pts = detail::points_from(prof);
  std::size_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double split = pts[i].rss1 + pts[i].rss2;
    if (negligible_rss(split, prof.centered_ss)) {
      throw DegenerateFit("split residual sum is zero at k=" + std::to_string(pts[i].k));
    }
    pts[i].criterion = std::log(split);
    if (pts[i].criterion < pts[best].criterion) best = i;
  }
  ScanResult res;
  res.k_hat = pts[best].k;
  // A split fit can never be worse than the pooled one; clamp rounding noise.
  res.statistic = std::max(0.0, -prof.n * (pts[best].criterion - std::log(prof.full.rss)));
  res.variant = Variant::t_hat;
  res.rss_full = prof.full.rss;
  res.per_k = std::move(pts);
  return res;
}

/// Known-variance statistic (1/sigma2) max_k S_k^T C_k^{-1} C_n C~_k^{-1} S_k.
inline ScanResult t_known_sigma(const Sample& sample, double sigma2, const ScanRange& range,
                                DesignScaling scaling = DesignScaling::scaled) {
  detail::require(sigma2 > 0.0 && std::isfinite(sigma2), "sigma2 must be positive");
  const SplitProfile prof = detail::profile_for(sample, range, scaling);
  auto pts = detail::points_from(prof);
  for (auto& pt : pts) pt.criterion = pt.quad_form / sigma2;
  return detail::finish_max(std::move(pts), Variant::t_known_sigma, prof.full.rss);
}

struct VariantResults {
  ScanResult t1;  ///< max quad / sigma_n^2
  ScanResult t2;  ///< max_k quad(k) / (sigma_{k,1}^2 + sigma_{k,2}^2)
  ScanResult t3;  ///< max quad / min_k (sigma_{k,1}^2 + sigma_{k,2}^2)
};

/// The three plug-in-variance versions of the known-variance statistic. All
/// variances use divisor n.
inline VariantResults t_variants(const Sample& sample, const ScanRange& range,
                                 DesignScaling scaling = DesignScaling::scaled) {
  const SplitProfile prof = detail::profile_for(sample, range, scaling);
  detail::require_nondegenerate_full(prof);
  const double n = prof.n;
  const double var_full = prof.full.rss / n;
  const auto base = detail::points_from(prof);

  double min_split_var = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double split = base[i].rss1 + base[i].rss2;
    if (negligible_rss(split, prof.centered_ss)) {
      throw DegenerateFit("split residual sum is zero at k=" + std::to_string(base[i].k));
    }
    min_split_var = i == 0 ? split / n : std::min(min_split_var, split / n);
  }

  auto p1 = base;
  auto p2 = base;
  auto p3 = base;
  for (std::size_t i = 0; i < base.size(); ++i) {
    p1[i].criterion = base[i].quad_form / var_full;
    p2[i].criterion = base[i].quad_form / ((base[i].rss1 + base[i].rss2) / n);
    p3[i].criterion = base[i].quad_form / min_split_var;
  }
  return {detail::finish_max(std::move(p1), Variant::t1, prof.full.rss),
          detail::finish_max(std::move(p2), Variant::t2, prof.full.rss),
          detail::finish_max(std::move(p3), Variant::t3, prof.full.rss)};
}

/// Trimmed statistic (1/sigma_n^2) max over floor(n delta) <= k <= n - floor(n delta).
inline ScanResult t_trimmed(const Sample& sample, double delta,
                            DesignScaling scaling = DesignScaling::scaled) {
  const ScanRange range = ScanRange::trimmed(sample.size(), sample.order(), delta);
  const SplitProfile prof = detail::profile_for(sample, range, scaling);
  detail::require_nondegenerate_full(prof);
  const double var_full = prof.full.rss / prof.n;
  auto pts = detail::points_from(prof);
  for (auto& pt : pts) pt.criterion = pt.quad_form / var_full;
  return detail::finish_max(std::move(pts), Variant::t_delta, prof.full.rss);
}

}  // namespace polybreak
