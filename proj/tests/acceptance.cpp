// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                 run everything
//   acceptance --criterion 3   run one criterion

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "polybreak/cli.hpp"
#include "polybreak/polybreak.hpp"
#include "support.hpp"

using namespace polybreak;
namespace pc = polybreak::cli;
using support::Quad;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string config(const std::string& name) { return std::string(POLYBREAK_CONFIG_DIR) + "/" + name; }

// ---------------------------------------------------------------- 1
Outcome size_parity() {
  int inside_total = 0;
  bool ok = true;
  std::string detail;
  for (const char* file : {"table1_p1.cfg", "table1_p2.cfg"}) {
    const auto doc = pc::cmd_simulate(config(file));
    int inside = 0;
    for (const auto& row : doc["rows"]) {
      for (const auto& cell : row["cells"]) {
        const double alpha = cell["alpha"].get<double>();
        const double tol = alpha > 0.075 ? 1.9 : 1.4;
        const double rate = cell["rate_pct"].get<double>();
        const bool in = std::abs(rate - 100.0 * alpha) <= tol;
        inside += in;
        std::printf("  %s n=%d alpha=%.2f rate=%.1f%% (se %.2f) %s\n", file, row["n"].get<int>(), alpha, rate,
                    cell["mc_se_pct"].get<double>(), in ? "in" : "OUT");
      }
    }
    inside_total += inside;
    ok = ok && inside >= 5;
    detail += fmt("%s %d/6 in band; ", file, inside);
  }
  ok = ok && inside_total >= 10;
  return {ok, detail + fmt("%d/12 cells within 2 MC SE of nominal (need 10)", inside_total)};
}

// ---------------------------------------------------------------- 2
Outcome power_parity() {
  // Published power (percent): n -> {10%, 5%}.
  const std::map<std::string, std::map<int, std::pair<double, double>>> table{
      {"table2_p1_k2.cfg", {{50, {45.4, 34.1}}, {100, {80.5, 71.6}}, {200, {99.2, 98.7}}, {400, {100, 100}}}},
      {"table2_p1_k5.cfg", {{50, {40.1, 29.0}}, {100, {67.1, 56.6}}, {200, {94.3, 91.4}}, {400, {100, 98.2}}}},
      {"table2_p2_k2.cfg", {{50, {36.5, 28.5}}, {100, {68.0, 57.9}}, {200, {96.1, 94.2}}, {400, {100, 100}}}},
      {"table2_p2_k5.cfg", {{50, {16.6, 10.2}}, {100, {24.2, 17.1}}, {200, {46.4, 35.1}}, {400, {78.7, 71.0}}}},
  };
  std::map<int, int> inside_by_order;
  for (const auto& [file, ref] : table) {
    const auto doc = pc::cmd_simulate(config(file));
    const int order = doc["config"]["order"].get<int>();
    for (const auto& row : doc["rows"]) {
      const int n = row["n"].get<int>();
      for (const auto& cell : row["cells"]) {
        const double alpha = cell["alpha"].get<double>();
        const double want = alpha > 0.075 ? ref.at(n).first : ref.at(n).second;
        const double rate = cell["rate_pct"].get<double>();
        const bool in = std::abs(rate - want) <= 5.0;
        inside_by_order[order] += in;
        std::printf("  %s n=%d alpha=%.2f power=%.1f%% published=%.1f%% %s\n", file.c_str(), n, alpha, rate, want,
                    in ? "in" : "OUT");
      }
    }
  }
  const bool ok = inside_by_order[1] >= 12 && inside_by_order[2] >= 12;
  return {ok, fmt("p=1: %d/16, p=2: %d/16 cells within 5pp (need 12 each)", inside_by_order[1], inside_by_order[2])};
}

// ---------------------------------------------------------------- 3
Outcome lr_identity() {
  double worst_gram = 0.0;
  double worst_profile = 0.0;
  long checked = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto inst = support::random_instance(seed + 10000);
    const auto prof = split_profile(inst.y, inst.p, inst.p + 1, inst.n - inst.p - 1);
    const oracle::Big full = oracle::rss(inst.y, inst.p, 1, inst.n);
    for (int k = inst.p + 1; k <= inst.n - inst.p - 1; ++k) {
      const oracle::Big split = oracle::rss(inst.y, inst.p, 1, k) + oracle::rss(inst.y, inst.p, k + 1, inst.n);
      const double lhs = static_cast<double>(full - split);  // n (sigma_n^2 - sigma_k1^2 - sigma_k2^2)
      const auto g = gram_triple<Quad>(inst.n, inst.p, k);
      const double rhs = static_cast<double>(sandwich_quadratic_form<Quad>(score_vector_from_moments<Quad>(inst.y, inst.p, k), g));
      worst_gram = std::max(worst_gram, support::rel_diff(lhs, rhs));
      worst_profile = std::max(worst_profile, support::rel_diff(lhs, prof.quad[prof.index(k)]));
      ++checked;
    }
  }
  const bool ok = worst_gram <= 1e-8 && worst_profile <= 1e-8;
  return {ok, fmt("%ld splits; max rel. error: Gram route %.2e, scan profile %.2e (tol 1e-8)", checked, worst_gram,
                  worst_profile)};
}

// ---------------------------------------------------------------- 4
Outcome oracle_equivalence() {
  double worst = 0.0;
  int k_mismatch = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto inst = support::random_instance(seed + 20000);
    const auto range = ScanRange::paper_default(inst.n, inst.p);
    const auto res = t_hat(Sample(inst.y, inst.p), range);
    const auto want = oracle::t_hat(inst.y, inst.p, range.lo, range.hi);
    worst = std::max(worst, support::rel_diff(res.statistic, want.statistic));
    k_mismatch += res.k_hat != want.k_hat;
  }
  return {worst <= 1e-8 && k_mismatch == 0,
          fmt("100 instances; max rel. error %.2e (tol 1e-8); k_hat mismatches %d", worst, k_mismatch)};
}

// ---------------------------------------------------------------- 5
Outcome invariance_suite() {
  double shift = 0.0, scale_err = 0.0, design = 0.0, design_gram = 0.0, additivity = 0.0, decomposition = 0.0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto inst = support::random_instance(seed + 30000);
    const int n = inst.n, p = inst.p;
    const auto range = ScanRange::paper_default(n, p);
    std::vector<double> ys = inst.y, yc = inst.y;
    for (int i = 1; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      double add = 0.0, pw = 1.0;
      for (int j = 0; j <= p; ++j) {
        add += (2.5 - 1.3 * j) * pw;
        pw *= t;
      }
      ys[static_cast<std::size_t>(i - 1)] += add;
      yc[static_cast<std::size_t>(i - 1)] *= 4.0;
    }
    const Sample a(inst.y, p), b(ys, p), c(yc, p);
    const double t0 = t_hat(a, range).statistic;
    const auto v0 = t_variants(a, range);
    for (const Sample* s : {&b, &c}) {
      double& slot = s == &b ? shift : scale_err;
      slot = std::max(slot, std::abs(t_hat(*s, range).statistic - t0));
      const auto v = t_variants(*s, range);
      slot = std::max({slot, std::abs(v.t1.statistic - v0.t1.statistic), std::abs(v.t2.statistic - v0.t2.statistic),
                       std::abs(v.t3.statistic - v0.t3.statistic)});
    }
    const auto ps = split_profile(inst.y, p, p + 1, n - p - 1, DesignScaling::scaled);
    const auto pr = split_profile(inst.y, p, p + 1, n - p - 1, DesignScaling::raw);
    for (int k = p + 1; k <= n - p - 1; ++k) {
      const auto ix = ps.index(k);
      design = std::max(design, support::rel_diff(ps.quad[ix], pr.quad[ix]));
      const auto gs = gram_triple<Quad>(n, p, k, DesignScaling::scaled);
      const auto gr = gram_triple<Quad>(n, p, k, DesignScaling::raw);
      const auto ss = score_vector_from_moments<Quad>(inst.y, p, k, DesignScaling::scaled);
      const auto sr = score_vector_from_moments<Quad>(inst.y, p, k, DesignScaling::raw);
      const double qs = static_cast<double>(split_quadratic_form<Quad>(ss, gs));
      design_gram = std::max(design_gram, support::rel_diff(qs, static_cast<double>(split_quadratic_form<Quad>(sr, gr))));
      const auto gd = gram_triple<double>(n, p, k);
      additivity = std::max(additivity, (gd.c_k + gd.c_tilde_k - gd.c_n).cwiseAbs().maxCoeff() / gd.c_n.cwiseAbs().maxCoeff());
      decomposition = std::max(decomposition, support::rel_diff(qs, static_cast<double>(sandwich_quadratic_form<Quad>(ss, gs))));
      decomposition = std::max(decomposition,
                               std::abs(ps.full.rss - ps.rss1[ix] - ps.rss2[ix] - ps.quad[ix]) / ps.full.rss);
    }
  }
  const bool ok = shift <= 1e-8 && scale_err <= 1e-8 && design <= 1e-8 && design_gram <= 1e-8 && additivity <= 1e-12 &&
                  decomposition <= 1e-8;
  return {ok, fmt("shift %.1e, scale %.1e (abs, tol 1e-8); design scaling %.1e / Gram %.1e; additivity %.1e; "
                  "decomposition %.1e",
                  shift, scale_err, design, design_gram, additivity, decomposition)};
}

// ---------------------------------------------------------------- 6
Outcome asymptotic_round_trip() {
  double worst = 0.0;
  for (int i = 1; i <= 500; ++i) {
    const double alpha = i / 1000.0;
    for (int p : {1, 2}) {
      const CriticalValueSpec spec{100, p, default_gamma(p).value, alpha};
      worst = std::max(worst, std::abs(p_value(critical_value(spec), 100, p, spec.gamma) - alpha));
    }
  }
  const double g1 = std::abs(gamma_function(1.0) - 1.0);
  const double g15 = std::abs(gamma_function(1.5) / (std::sqrt(std::numbers::pi) / 2.0) - 1.0);
  const double g5 = std::abs(gamma_function(5.0) / 24.0 - 1.0);
  const bool ok = worst <= 1e-10 && g1 <= 1e-12 && g15 <= 1e-12 && g5 <= 1e-12;
  return {ok, fmt("max |p(c(a)) - a| = %.1e over a in 0.001..0.5; Gamma rel. errors %.1e %.1e %.1e", worst, g1, g15, g5)};
}

// ---------------------------------------------------------------- 7
Outcome limit_moments() {
  const int p = 2;
  const int paths = 2000;
  const int m = 1000;
  const std::vector<int> checkpoints{m / 2, m};
  std::vector<Vector<double>> second(checkpoints.size(), Vector<double>::Zero(p + 1));
  Matrix<double> qq = Matrix<double>::Zero(p + 1, p + 1);
  const LimitBasis basis(p);
  for (int r = 0; r < paths; ++r) {
    Engine rng = derive_stream(777, {static_cast<std::uint64_t>(r)});
    PolyIntegralWalker w(p);
    for (int j = 1; j <= m; ++j) {
      w.advance(static_cast<double>(j) / m, rng);
      for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        if (j == checkpoints[c]) second[c] += w.gamma().cwiseProduct(w.gamma());
      }
    }
    const Vector<double> q = basis.qhat(1.0, w.gamma());
    qq += q * q.transpose();
  }
  qq /= paths;
  double worst_var = 0.0;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const double t = static_cast<double>(checkpoints[c]) / m;
    for (int i = 0; i <= p; ++i) {
      const double want = std::pow(t, 2 * i + 1) / (2 * i + 1);
      const double rel = std::abs(second[c](i) / paths / want - 1.0);
      std::printf("  Var(Gamma_%d(%.2f)) ratio %.4f\n", i, t, second[c](i) / paths / want);
      worst_var = std::max(worst_var, rel);
    }
  }
  double worst_unit = 0.0, worst_corr = 0.0;
  for (int i = 0; i <= p; ++i) {
    worst_unit = std::max(worst_unit, std::abs(qq(i, i) - 1.0));
    for (int j = 0; j < i; ++j) worst_corr = std::max(worst_corr, std::abs(qq(i, j) / std::sqrt(qq(i, i) * qq(j, j))));
  }
  const bool ok = worst_var <= 0.05 && worst_unit <= 0.1 && worst_corr <= 0.05;
  return {ok, fmt("max rel. variance error %.3f (tol 0.05); qhat |var-1| %.3f (tol 0.1); max |corr| %.3f (tol 0.05)",
                  worst_var, worst_unit, worst_corr)};
}

// ---------------------------------------------------------------- 8
Outcome trimmed_cross_check() {
  PathConfig path;
  path.steps_per_unit = 1000;
  path.grid = GridKind::uniform;
  path.seed = 8;
  const auto table = simulate_trimmed_limit(0, 0.1, 5000, path);
  const auto bridge = quantiles(oracle::bridge_sup_sample(0.1, 5000, 1000, 88), trimmed_quantile_levels());
  bool ok = true;
  std::string detail;
  for (std::size_t q = 0; q < bridge.size(); ++q) {
    const auto& a = table.quantiles[q];
    const auto& b = bridge[q];
    const double tol = 2.0 * std::hypot(a.std_error, b.std_error);
    const bool in = std::abs(a.value - b.value) <= tol;
    ok = ok && in;
    detail += fmt("q%.2f: %.3f vs bridge %.3f (tol %.3f)%s; ", a.level, a.value, b.value, tol, in ? "" : " OUT");
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 9
Outcome gumbel_structure() {
  PathConfig path;
  path.grid = GridKind::geometric;
  path.steps_per_unit = 1000;
  path.seed = 9;
  const auto chk = gumbel_check(1, 1e4, 2000, path);
  bool ok = std::abs(chk.empirical_median - chk.limit_median) <= 0.8;
  std::string detail = fmt("median %.3f vs %.3f (tol 0.8); KS %.3f; ", chk.empirical_median, chk.limit_median,
                           chk.ks_distance);
  for (const auto& ind : chk.independence) {
    const bool in = std::abs(ind.cdf_max - ind.cdf_single_sq) <= 3.0 * ind.std_error;
    ok = ok && in;
    detail += fmt("c=%.2f: %.3f vs %.3f%s; ", ind.threshold, ind.cdf_max, ind.cdf_single_sq, in ? "" : " OUT");
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 10
Outcome determinism() {
  std::vector<std::string> failures;
  auto sim = [](unsigned threads) {
    auto f = pc::parse_sim_config("study = power\nreps = 200\nn_list = 50, 100\norder = 2\ngamma = auto\n"
                                  "beta0 = 1, 0, 2\nbeta_a = 0, 0, 0\nk_star_divisor = 2\nseed = 10\n");
    return pc::cmd_simulate(f, threads).dump();
  };
  const std::string s1 = sim(1);
  if (s1 != sim(1)) failures.push_back("simulate repeat");
  if (s1 != sim(4)) failures.push_back("simulate threads");

  auto limit = [](unsigned threads) {
    pc::LimitTableRequest req;
    req.order = 1;
    req.deltas = {0.1, 0.2};
    req.reps = 500;
    req.seed = 10;
    req.threads = threads;
    return pc::cmd_limit_table(req).dump();
  };
  const std::string l1 = limit(1);
  if (l1 != limit(1)) failures.push_back("limit-table repeat");
  if (l1 != limit(3)) failures.push_back("limit-table threads");

  PathConfig path;
  path.seed = 10;
  path.threads = 1;
  const auto g1 = gumbel_check(1, 2000, 1000, path);
  path.threads = 3;
  const auto g3 = gumbel_check(1, 2000, 1000, path);
  if (g1.xi1 != g3.xi1 || g1.xi2 != g3.xi2) failures.push_back("gumbel_check threads");

  pc::ScatterRequest sc;
  sc.beta_a = {0.0, 0.0};
  sc.k_star = 40;
  if (pc::cmd_scatter(sc).dump() != pc::cmd_scatter(sc).dump()) failures.push_back("scatter repeat");

  std::string detail = "simulate, limit-table, gumbel_check, scatter across repeats and thread counts";
  for (const auto& f : failures) detail += "; differs: " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"size parity", size_parity},
      {"power parity", power_parity},
      {"likelihood-ratio identity", lr_identity},
      {"oracle equivalence", oracle_equivalence},
      {"invariance suite", invariance_suite},
      {"asymptotics round trip", asymptotic_round_trip},
      {"limit-process moments", limit_moments},
      {"trimmed-limit cross-check", trimmed_cross_check},
      {"Gumbel structure", gumbel_structure},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only != 0 && id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %-26s %s  %s [%.1fs]\n", id, criteria[i].first.c_str(), out.pass ? "PASS" : "FAIL",
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
