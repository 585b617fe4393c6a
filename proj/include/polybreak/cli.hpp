#pragma once

// Command implementations behind the polybreak tool. Each command returns a
// JSON document (and optionally TSV text for tables); errors are mapped to exit
// codes by run_guarded.

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "polybreak/asymptotics.hpp"
#include "polybreak/errors.hpp"
#include "polybreak/limitlab.hpp"
#include "polybreak/regression.hpp"
#include "polybreak/scan.hpp"
#include "polybreak/simulate.hpp"

namespace polybreak::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { ok = 0, input_error = 2, degenerate = 3, invalid_config = 4 };

/// Raised for bad configuration files or option values (exit 4).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_integer(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline std::string read_file(const std::string& path, bool config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    const std::string msg = "cannot open " + path;
    if (config) throw ConfigError(msg);
    throw InputError(msg);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<double> config_reals(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (auto part : split(value, ',')) {
    const auto v = parse_double(part);
    if (!v || !std::isfinite(*v)) throw ConfigError("'" + std::string(key) + "': not a list of numbers: " + std::string(value));
    out.push_back(*v);
  }
  return out;
}

inline double config_real(std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v || !std::isfinite(*v)) throw ConfigError("'" + std::string(key) + "': not a number: " + std::string(value));
  return *v;
}

inline long long config_integer(std::string_view key, std::string_view value) {
  const auto v = parse_integer(value);
  if (!v) throw ConfigError("'" + std::string(key) + "': not an integer: " + std::string(value));
  return *v;
}

inline std::vector<double> to_std(const Vector<double>& v) { return {v.data(), v.data() + v.size()}; }

inline Vector<double> to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector<double>>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline const char* range_mode_name(RangeMode m) {
  switch (m) {
    case RangeMode::paper_default: return "paper";
    case RangeMode::bare: return "bare";
    case RangeMode::trimmed: return "trim";
  }
  return "unknown";
}

}  // namespace detail

/// Reads one numeric column. An optional first row "y" is a header, blank
/// lines are skipped, anything else that is not a finite number is an error.
inline std::vector<double> parse_series(std::string_view text, const std::string& origin = "input") {
  std::vector<double> y;
  bool seen_row = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = detail::trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty()) continue;
    if (!seen_row) {
      seen_row = true;
      if (line == "y" || line == "\"y\"") continue;
    }
    const auto v = detail::parse_double(line);
    if (!v) {
      throw InputError(origin + ":" + std::to_string(line_no) + ": not a single numeric value: '" + std::string(line) + "'");
    }
    if (!std::isfinite(*v)) throw InputError(origin + ":" + std::to_string(line_no) + ": value is not finite");
    y.push_back(*v);
  }
  return y;
}

inline std::vector<double> read_series(const std::string& path) {
  return parse_series(detail::read_file(path, false), path);
}

/// "paper", "bare" or "trim:<delta>".
inline RangeSpec parse_range(std::string_view text) {
  text = detail::trim(text);
  if (text == "paper") return {RangeMode::paper_default, 0.0};
  if (text == "bare") return {RangeMode::bare, 0.0};
  if (text.rfind("trim:", 0) == 0) {
    const auto d = detail::parse_double(text.substr(5));
    if (!d || !(*d > 0.0 && *d < 0.5)) throw ConfigError("trimming fraction must lie in (0, 1/2): " + std::string(text));
    return {RangeMode::trimmed, *d};
  }
  throw ConfigError("range must be paper, bare or trim:<delta>, got '" + std::string(text) + "'");
}

inline std::string format_range(const RangeSpec& r) {
  if (r.mode == RangeMode::trimmed) {
    std::ostringstream ss;
    ss << "trim:" << r.delta;
    return ss.str();
  }
  return detail::range_mode_name(r.mode);
}

struct GammaSetting {
  double value = 0.0;
  bool calibrated = false;
  bool automatic = false;
};

/// "auto" or a real number. Explicit values count as calibrated only when they
/// coincide with the calibrated default for the order.
inline GammaSetting parse_gamma(std::string_view text, int order) {
  text = detail::trim(text);
  const GammaChoice def = default_gamma(order);
  if (text == "auto") return {def.value, def.calibrated, true};
  const auto v = detail::parse_double(text);
  if (!v || !std::isfinite(*v)) throw ConfigError("gamma must be a number or 'auto', got '" + std::string(text) + "'");
  return {*v, def.calibrated && *v == def.value, false};
}

inline json gamma_json(const GammaSetting& g) {
  return {{"value", g.value}, {"source", g.automatic ? "auto" : "explicit"}, {"calibrated", g.calibrated}};
}

// ---------------------------------------------------------------- detect

struct DetectRequest {
  std::string input;
  int order = 1;
  double alpha = 0.05;
  std::string gamma = "auto";
  RangeSpec range;
  std::optional<double> sigma2;
  bool include_profile = false;
};

inline json detect_series(const std::vector<double>& y, const DetectRequest& req) {
  if (req.order < 0) throw ConfigError("order must be non-negative");
  if (!(req.alpha > 0.0 && req.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (req.sigma2 && !(*req.sigma2 > 0.0 && std::isfinite(*req.sigma2))) throw ConfigError("sigma2 must be positive");
  const int n = static_cast<int>(y.size());
  if (n < 2 * req.order + 6) {
    throw InputError("series has " + std::to_string(n) + " values, order " + std::to_string(req.order) +
                     " needs at least " + std::to_string(2 * req.order + 6));
  }
  const GammaSetting gamma = parse_gamma(req.gamma, req.order);
  ScanRange range;
  CriticalValueSpec spec{n, req.order, gamma.value, req.alpha};
  try {
    range = ScanRange::resolve(req.range, n, req.order);
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const Sample sample(y, req.order);
  const ScanResult res = req.sigma2 ? t_known_sigma(sample, *req.sigma2, range) : t_hat(sample, range);
  const double crit = critical_value(spec);
  const double pval = p_value(res.statistic, n, req.order, gamma.value);

  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "detect";
  out["n"] = n;
  out["order"] = req.order;
  out["variant"] = variant_name(res.variant);
  out["statistic"] = res.statistic;
  out["k_hat"] = res.k_hat;
  out["alpha"] = req.alpha;
  out["gamma"] = gamma_json(gamma);
  out["critical_value"] = crit;
  out["p_value"] = pval;
  out["decision"] = res.statistic > crit ? "reject" : "accept";
  out["range"] = {{"mode", detail::range_mode_name(range.mode)}, {"delta", range.delta}, {"lo", range.lo}, {"hi", range.hi}};
  if (req.sigma2) out["sigma2"] = *req.sigma2;
  out["rss_full"] = res.rss_full;
  if (req.include_profile) {
    json prof = json::array();
    for (const auto& pt : res.per_k) {
      prof.push_back({{"k", pt.k}, {"rss1", pt.rss1}, {"rss2", pt.rss2}, {"quad_form", pt.quad_form}, {"criterion", pt.criterion}});
    }
    out["profile"] = std::move(prof);
  }
  return out;
}

inline json cmd_detect(const DetectRequest& req) { return detect_series(read_series(req.input), req); }

inline std::string detect_profile_tsv(const json& report) {
  std::ostringstream ss;
  ss << "k\trss1\trss2\tquad_form\tcriterion\n";
  if (report.contains("profile")) {
    for (const auto& pt : report["profile"]) {
      ss << pt["k"].get<int>() << '\t' << pt["rss1"].dump() << '\t' << pt["rss2"].dump() << '\t'
         << pt["quad_form"].dump() << '\t' << pt["criterion"].dump() << '\n';
    }
  }
  return ss.str();
}

// ---------------------------------------------------------------- critval / pvalue

inline CriticalValueSpec checked_spec(int n, int order, double gamma, double alpha) {
  CriticalValueSpec spec{n, order, gamma, alpha};
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

inline json cmd_critval(int n, int order, const std::string& gamma_text, double alpha) {
  if (order < 0) throw ConfigError("order must be non-negative");
  const GammaSetting gamma = parse_gamma(gamma_text, order);
  const auto spec = checked_spec(n, order, gamma.value, alpha);
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "critval";
  out["n"] = n;
  out["order"] = order;
  out["gamma"] = gamma_json(gamma);
  out["alpha"] = alpha;
  out["correction_g"] = correction_g(n, order, gamma.value);
  out["critical_value"] = critical_value(spec);
  return out;
}

inline json cmd_pvalue(int n, int order, const std::string& gamma_text, double statistic) {
  if (order < 0) throw ConfigError("order must be non-negative");
  if (!std::isfinite(statistic)) throw ConfigError("statistic must be finite");
  const GammaSetting gamma = parse_gamma(gamma_text, order);
  (void)checked_spec(n, order, gamma.value, 0.5);
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "pvalue";
  out["n"] = n;
  out["order"] = order;
  out["gamma"] = gamma_json(gamma);
  out["statistic"] = statistic;
  out["correction_g"] = correction_g(n, order, gamma.value);
  out["p_value"] = p_value(statistic, n, order, gamma.value);
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimFile {
  std::string study = "size";
  SimConfig config;
  GammaSetting gamma;
};

/// Flat "key = value" text; '#' starts a comment. Keys mirror SimConfig.
inline SimFile parse_sim_config(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    if (!kv.emplace(key, std::string(detail::trim(line.substr(eq + 1)))).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }

  static const std::vector<std::string> known{
      "study", "reps", "n_list", "order", "gamma", "beta0", "beta_a", "k_star", "k_star_divisor", "errors",
      "sigma", "nu", "phi", "omega", "arch", "garch", "unit_variance", "alphas", "range", "seed", "threads"};
  for (const auto& [key, value] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown key '" + key + "'");
  }
  auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto need = [&](const char* key) {
    auto v = get(key);
    if (!v) throw ConfigError(std::string("missing key '") + key + "'");
    return *v;
  };

  SimFile f;
  SimConfig& c = f.config;
  f.study = get("study").value_or("size");
  if (f.study != "size" && f.study != "power") throw ConfigError("study must be size or power");
  c.reps = static_cast<int>(detail::config_integer("reps", need("reps")));
  if (c.reps < 1) throw ConfigError("reps must be positive");
  c.n_list.clear();
  for (double v : detail::config_reals("n_list", need("n_list"))) {
    if (v != std::floor(v) || v < 1) throw ConfigError("n_list must hold positive integers");
    c.n_list.push_back(static_cast<int>(v));
  }
  c.order = static_cast<int>(detail::config_integer("order", need("order")));
  if (c.order < 0) throw ConfigError("order must be non-negative");
  f.gamma = parse_gamma(get("gamma").value_or("auto"), c.order);
  c.gamma = f.gamma.value;
  c.gamma_calibrated = f.gamma.calibrated;

  const auto beta0 = detail::config_reals("beta0", need("beta0"));
  if (static_cast<int>(beta0.size()) != c.order + 1) throw ConfigError("beta0 must have order + 1 entries");
  if (auto ba = get("beta_a")) {
    const auto beta_a = detail::config_reals("beta_a", *ba);
    if (beta_a.size() != beta0.size()) throw ConfigError("beta_a must have order + 1 entries");
    const bool has_k = get("k_star").has_value();
    const bool has_div = get("k_star_divisor").has_value();
    if (has_k == has_div) throw ConfigError("a change needs exactly one of k_star and k_star_divisor");
    c.change = ChangeModel::single_change(detail::to_eigen(beta0), detail::to_eigen(beta_a),
                                          has_k ? static_cast<int>(detail::config_integer("k_star", need("k_star"))) : 0);
    if (has_div) c.k_star_divisor = static_cast<int>(detail::config_integer("k_star_divisor", need("k_star_divisor")));
    if (c.k_star_divisor < 0) throw ConfigError("k_star_divisor must be positive");
  } else {
    if (get("k_star") || get("k_star_divisor")) throw ConfigError("k_star given without beta_a");
    c.change = ChangeModel::no_change(detail::to_eigen(beta0));
  }
  if ((f.study == "power") != c.change.has_change()) {
    throw ConfigError(f.study == "power" ? "a power study needs beta_a" : "a size study must not set beta_a");
  }

  const std::string kind = get("errors").value_or("iid_normal");
  if (kind == "iid_normal") c.errors.kind = ErrorKind::iid_normal;
  else if (kind == "student_t") c.errors.kind = ErrorKind::student_t;
  else if (kind == "ar1") c.errors.kind = ErrorKind::ar1;
  else if (kind == "garch11") c.errors.kind = ErrorKind::garch11;
  else throw ConfigError("unknown error model '" + kind + "'");
  if (auto v = get("sigma")) c.errors.sigma = detail::config_real("sigma", *v);
  if (auto v = get("nu")) c.errors.nu = detail::config_real("nu", *v);
  if (auto v = get("phi")) c.errors.phi = detail::config_real("phi", *v);
  if (auto v = get("omega")) c.errors.omega = detail::config_real("omega", *v);
  if (auto v = get("arch")) c.errors.arch = detail::config_real("arch", *v);
  if (auto v = get("garch")) c.errors.garch = detail::config_real("garch", *v);
  if (auto v = get("unit_variance")) {
    if (*v != "true" && *v != "false") throw ConfigError("unit_variance must be true or false");
    c.errors.unit_variance = *v == "true";
  }
  if (auto v = get("alphas")) c.alphas = detail::config_reals("alphas", *v);
  if (auto v = get("range")) c.range = parse_range(*v);
  if (auto v = get("seed")) {
    const auto s = detail::config_integer("seed", *v);
    if (s < 0) throw ConfigError("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("threads")) {
    const auto t = detail::config_integer("threads", *v);
    if (t < 0) throw ConfigError("threads must be non-negative");
    c.threads = static_cast<unsigned>(t);
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return f;
}

inline SimFile read_sim_config(const std::string& path) {
  return parse_sim_config(detail::read_file(path, true));
}

/// Report document. The thread count is deliberately left out so that output
/// does not depend on it.
inline json sim_report_json(const SimReport& rep, const GammaSetting& gamma) {
  const SimConfig& c = rep.config;
  json cfg;
  cfg["reps"] = c.reps;
  cfg["n_list"] = c.n_list;
  cfg["order"] = c.order;
  cfg["gamma"] = gamma_json(gamma);
  cfg["beta0"] = detail::to_std(c.change.beta0);
  if (c.change.has_change()) {
    cfg["beta_a"] = detail::to_std(*c.change.beta_a);
    if (c.k_star_divisor > 0) cfg["k_star_divisor"] = c.k_star_divisor;
    else cfg["k_star"] = c.change.k_star;
  }
  cfg["errors"] = {{"kind", error_kind_name(c.errors.kind)}, {"sigma", c.errors.sigma}, {"nu", c.errors.nu},
                   {"phi", c.errors.phi}, {"omega", c.errors.omega}, {"arch", c.errors.arch},
                   {"garch", c.errors.garch}, {"unit_variance", c.errors.unit_variance}};
  cfg["alphas"] = c.alphas;
  cfg["range"] = format_range(c.range);
  cfg["seed"] = c.seed;

  json rows = json::array();
  for (const auto& r : rep.rows) {
    json cells = json::array();
    for (const auto& cell : r.cells) {
      cells.push_back({{"alpha", cell.alpha}, {"critical_value", cell.critical_value}, {"rejections", cell.rejections},
                       {"rate_pct", cell.rate_pct}, {"mc_se_pct", cell.mc_se_pct}});
    }
    json row{{"n", r.n}, {"k_star", r.k_star}, {"valid_reps", r.valid_reps}, {"degenerate", r.degenerate}};
    if (c.change.has_change()) {
      row["mean_k_hat"] = r.mean_k_hat;
      row["median_k_hat"] = r.median_k_hat;
    }
    row["cells"] = std::move(cells);
    rows.push_back(std::move(row));
  }
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "simulate";
  out["study"] = rep.study;
  out["seed"] = c.seed;
  out["config"] = std::move(cfg);
  out["rows"] = std::move(rows);
  return out;
}

inline json cmd_simulate(const SimFile& file, std::optional<unsigned> threads = std::nullopt) {
  SimConfig cfg = file.config;
  if (threads) cfg.threads = *threads;
  const SimReport rep = file.study == "power" ? run_power(cfg) : run_size(cfg);
  return sim_report_json(rep, file.gamma);
}

inline json cmd_simulate(const std::string& config_path, std::optional<unsigned> threads = std::nullopt) {
  return cmd_simulate(read_sim_config(config_path), threads);
}

inline std::string simulate_tsv(const json& report) {
  std::ostringstream ss;
  ss << "n\tk_star\talpha\tcritical_value\trejections\tvalid_reps\tdegenerate\trate_pct\tmc_se_pct\n";
  for (const auto& r : report["rows"]) {
    for (const auto& c : r["cells"]) {
      ss << r["n"].get<int>() << '\t' << r["k_star"].get<int>() << '\t' << c["alpha"].dump() << '\t'
         << c["critical_value"].dump() << '\t' << c["rejections"].get<int>() << '\t' << r["valid_reps"].get<int>()
         << '\t' << r["degenerate"].get<int>() << '\t' << c["rate_pct"].dump() << '\t' << c["mc_se_pct"].dump()
         << '\n';
    }
  }
  return ss.str();
}

// ---------------------------------------------------------------- limit-table

struct LimitTableRequest {
  int order = 0;
  std::vector<double> deltas{0.1};
  int reps = 5000;
  std::uint64_t seed = 1;
  int steps_per_unit = 1000;
  unsigned threads = 0;
};

inline json cmd_limit_table(const LimitTableRequest& req) {
  if (req.order < 0 || req.order > kMaxLimitOrder) throw ConfigError("order must lie in 0.." + std::to_string(kMaxLimitOrder));
  if (req.deltas.empty()) throw ConfigError("need at least one trimming fraction");
  for (double d : req.deltas) {
    if (!(d > 0.0 && d < 0.5)) throw ConfigError("trimming fraction must lie in (0, 1/2)");
  }
  if (req.reps < 1) throw ConfigError("reps must be positive");
  if (req.steps_per_unit < 1) throw ConfigError("steps must be positive");
  PathConfig path;
  path.steps_per_unit = req.steps_per_unit;
  path.grid = GridKind::uniform;
  path.seed = req.seed;
  path.threads = req.threads;

  json tables = json::array();
  for (double d : req.deltas) {
    TrimmedLimitTable t;
    try {
      t = simulate_trimmed_limit(req.order, d, req.reps, path);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    json qs = json::array();
    for (const auto& q : t.quantiles) qs.push_back({{"level", q.level}, {"value", q.value}, {"std_error", q.std_error}});
    tables.push_back({{"delta", d}, {"quantiles", std::move(qs)}});
  }
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "limit-table";
  out["order"] = req.order;
  out["reps"] = req.reps;
  out["steps_per_unit"] = req.steps_per_unit;
  out["seed"] = req.seed;
  out["tables"] = std::move(tables);
  return out;
}

inline std::string limit_table_tsv(const json& report) {
  std::ostringstream ss;
  ss << "order\tdelta\tlevel\tquantile\tstd_error\n";
  for (const auto& t : report["tables"]) {
    for (const auto& q : t["quantiles"]) {
      ss << report["order"].get<int>() << '\t' << t["delta"].dump() << '\t' << q["level"].dump() << '\t'
         << q["value"].dump() << '\t' << q["std_error"].dump() << '\n';
    }
  }
  return ss.str();
}

// ---------------------------------------------------------------- scatter

struct ScatterRequest {
  int n = 200;
  std::vector<double> beta0{1.0, 1.0};
  std::vector<double> beta_a;  ///< empty: no change
  int k_star = 0;
  double sigma = 1.0;
  std::uint64_t seed = 1;
};

inline json cmd_scatter(const ScatterRequest& req) {
  ChangeModel model = req.beta_a.empty()
                          ? ChangeModel::no_change(detail::to_eigen(req.beta0))
                          : ChangeModel::single_change(detail::to_eigen(req.beta0), detail::to_eigen(req.beta_a), req.k_star);
  ErrorModel errors;
  errors.sigma = req.sigma;
  std::optional<Sample> sample;
  try {
    if (req.n < 2 * model.order() + 6) throw InvalidArgument("n too small for the order");
    sample.emplace(generate(req.n, model, errors, req.seed));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  json pts = json::array();
  for (const auto& p : scatter_dump(*sample, model)) pts.push_back({{"x", p.x}, {"y", p.y}, {"regime", p.regime}});
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "scatter";
  out["n"] = req.n;
  out["order"] = model.order();
  out["beta0"] = req.beta0;
  if (model.has_change()) {
    out["beta_a"] = req.beta_a;
    out["k_star"] = req.k_star;
  }
  out["sigma"] = req.sigma;
  out["seed"] = req.seed;
  out["points"] = std::move(pts);
  return out;
}

inline std::string scatter_tsv(const json& report) {
  std::ostringstream ss;
  ss << "x\ty\tregime\n";
  for (const auto& p : report["points"]) ss << p["x"].dump() << '\t' << p["y"].dump() << '\t' << p["regime"].get<int>() << '\n';
  return ss.str();
}

// ---------------------------------------------------------------- plumbing

/// Runs body and maps exceptions to exit codes, printing a diagnostic to err.
inline int run_guarded(const std::function<void()>& body, std::ostream& err = std::cerr) {
  try {
    body();
    return ExitCode::ok;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return ExitCode::input_error;
  } catch (const DegenerateFit& e) {
    err << "degenerate fit: " << e.what() << '\n';
    return ExitCode::degenerate;
  } catch (const RankDeficient& e) {
    err << "degenerate fit: " << e.what() << '\n';
    return ExitCode::degenerate;
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return ExitCode::invalid_config;
  } catch (const InvalidArgument& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return ExitCode::invalid_config;
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

}  // namespace polybreak::cli
