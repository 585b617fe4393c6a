#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "polybreak/cli.hpp"

namespace pc = polybreak::cli;

namespace {

struct Outputs {
  std::string json_path;
  std::string tsv_path;
};

void add_outputs(CLI::App* cmd, Outputs& out, bool tsv) {
  cmd->add_option("--output,-o", out.json_path, "JSON report path (default: stdout)");
  if (tsv) cmd->add_option("--tsv", out.tsv_path, "also write the table as TSV");
}

void emit(const pc::json& doc, const Outputs& out, const std::string& tsv) {
  pc::write_text(out.json_path, doc.dump(2) + "\n");
  if (!out.tsv_path.empty()) pc::write_text(out.tsv_path, tsv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change-point detection in polynomial regression"};
  app.require_subcommand(1);

  std::string range_text = "paper";
  std::string gamma_text = "auto";

  pc::DetectRequest detect;
  Outputs detect_out;
  std::optional<double> sigma2;
  auto* c_detect = app.add_subcommand("detect", "scan a series for a single change");
  c_detect->add_option("--input,-i", detect.input, "CSV with one numeric column")->required();
  c_detect->add_option("--order,-p", detect.order, "polynomial order")->default_val(1);
  c_detect->add_option("--alpha", detect.alpha, "test level")->default_val(0.05);
  c_detect->add_option("--gamma", gamma_text, "calibration exponent or 'auto'")->default_val("auto");
  c_detect->add_option("--sigma2", sigma2, "known error variance");
  c_detect->add_option("--range", range_text, "paper | bare | trim:<delta>")->default_val("paper");
  c_detect->add_flag("--profile", detect.include_profile, "include the per-k scan profile");
  add_outputs(c_detect, detect_out, true);

  int n = 0;
  int order = 1;
  double alpha = 0.05;
  double statistic = 0.0;
  Outputs scalar_out;
  auto* c_crit = app.add_subcommand("critval", "asymptotic critical value");
  c_crit->add_option("--n,-n", n, "sample size")->required();
  c_crit->add_option("--order,-p", order, "polynomial order")->default_val(1);
  c_crit->add_option("--gamma", gamma_text, "calibration exponent or 'auto'")->default_val("auto");
  c_crit->add_option("--alpha", alpha, "test level")->default_val(0.05);
  add_outputs(c_crit, scalar_out, false);

  auto* c_pval = app.add_subcommand("pvalue", "asymptotic p-value of a statistic");
  c_pval->add_option("--n,-n", n, "sample size")->required();
  c_pval->add_option("--order,-p", order, "polynomial order")->default_val(1);
  c_pval->add_option("--gamma", gamma_text, "calibration exponent or 'auto'")->default_val("auto");
  c_pval->add_option("--statistic,-t", statistic, "observed statistic")->required();
  add_outputs(c_pval, scalar_out, false);

  std::string config_path;
  std::optional<unsigned> threads;
  Outputs sim_out;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo size or power study");
  c_sim->add_option("--config,-c", config_path, "key = value study file")->required();
  c_sim->add_option("--threads", threads, "worker threads (0 = all cores); does not change results");
  add_outputs(c_sim, sim_out, true);

  pc::LimitTableRequest limit;
  Outputs limit_out;
  unsigned limit_threads = 0;
  auto* c_limit = app.add_subcommand("limit-table", "quantiles of the trimmed limit law");
  c_limit->add_option("--order,-p", limit.order, "polynomial order")->default_val(0);
  c_limit->add_option("--delta", limit.deltas, "trimming fractions")->delimiter(',')->default_val("0.1");
  c_limit->add_option("--reps", limit.reps, "replications")->default_val(5000);
  c_limit->add_option("--seed", limit.seed, "master seed")->default_val(1);
  c_limit->add_option("--steps", limit.steps_per_unit, "grid points per unit time")->default_val(1000);
  c_limit->add_option("--threads", limit_threads, "worker threads (0 = all cores)")->default_val(0);
  add_outputs(c_limit, limit_out, true);

  pc::ScatterRequest scatter;
  Outputs scatter_out;
  auto* c_scatter = app.add_subcommand("scatter", "simulated series as plot data");
  c_scatter->add_option("--n,-n", scatter.n, "sample size")->default_val(200);
  c_scatter->add_option("--beta0", scatter.beta0, "coefficients before the change")->delimiter(',')->default_val("1,1");
  c_scatter->add_option("--beta-a", scatter.beta_a, "coefficients after the change")->delimiter(',');
  c_scatter->add_option("--k-star", scatter.k_star, "change point");
  c_scatter->add_option("--sigma", scatter.sigma, "error standard deviation")->default_val(1.0);
  c_scatter->add_option("--seed", scatter.seed, "seed")->default_val(1);
  add_outputs(c_scatter, scatter_out, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pc::ExitCode::invalid_config;
  }

  return pc::run_guarded([&] {
    if (*c_detect) {
      detect.gamma = gamma_text;
      detect.range = pc::parse_range(range_text);
      detect.sigma2 = sigma2;
      const auto doc = pc::cmd_detect(detect);
      emit(doc, detect_out, pc::detect_profile_tsv(doc));
    } else if (*c_crit) {
      emit(pc::cmd_critval(n, order, gamma_text, alpha), scalar_out, "");
    } else if (*c_pval) {
      emit(pc::cmd_pvalue(n, order, gamma_text, statistic), scalar_out, "");
    } else if (*c_sim) {
      const auto doc = pc::cmd_simulate(config_path, threads);
      emit(doc, sim_out, pc::simulate_tsv(doc));
    } else if (*c_limit) {
      limit.threads = limit_threads;
      const auto doc = pc::cmd_limit_table(limit);
      emit(doc, limit_out, pc::limit_table_tsv(doc));
    } else if (*c_scatter) {
      const auto doc = pc::cmd_scatter(scatter);
      emit(doc, scatter_out, pc::scatter_tsv(doc));
    }
  });
}
