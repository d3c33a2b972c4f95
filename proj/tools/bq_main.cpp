// bq: experiment runner for noisy Bayesian quadrature strategies.
// Subcommands: run, sweep-splits, fit, oracle. Exit codes: 0 success,
// 1 configuration error, 2 oracle failure.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "bq/harness.hpp"

namespace {

void print_fits(const std::vector<bq::ScalingFit>& fits) {
  std::printf("%-8s %-10s %-10s %-10s %-8s %s\n", "strategy", "sigma", "slope", "intercept",
              "r2", "t-range");
  for (const bq::ScalingFit& f : fits) {
    if (f.valid)
      std::printf("%-8s %-10.4g %-10.4f %-10.4f %-8.4f [%d, %d]\n", f.strategy.c_str(), f.sigma,
                  f.slope, f.intercept, f.r2, f.t_lo, f.t_hi);
    else
      std::printf("%-8s %-10.4g (fit flagged: degenerate errors or too few checkpoints)\n",
                  f.strategy.c_str(), f.sigma);
  }
}

int cmd_run(const std::string& config_path, int t_min_cut) {
  const bq::ExperimentConfig cfg = bq::parse_config_file(config_path);
  const bq::ExperimentResult result = bq::run_experiment(cfg);
  const auto cells = bq::aggregate(result.records);
  const auto fits = bq::fit_all_scalings(cells, t_min_cut);

  std::printf("ground truth I = %.12g (oracle err estimate %.3g)\n", result.ground_truth,
              result.ground_truth_err);
  std::printf("%-8s %-10s %-6s %-14s %-14s %s\n", "strategy", "sigma", "t", "mean|err|",
              "std", "n");
  for (const auto& c : cells)
    std::printf("%-8s %-10.4g %-6d %-14.6g %-14.6g %d\n", c.strategy.c_str(), c.sigma, c.t,
                c.mean_error, c.std_error, c.n);
  print_fits(fits);

  int n_failed = 0;
  for (const auto& rec : result.records) n_failed += rec.failed ? 1 : 0;
  if (n_failed > 0) std::printf("warning: %d trial(s) failed and were skipped\n", n_failed);

  if (!cfg.output.empty()) {
    bq::emit_csv(result.records, cfg.output + ".csv");
    bq::emit_json(result, cells, fits, cfg.output + ".json");
    std::printf("wrote %s.csv and %s.json\n", cfg.output.c_str(), cfg.output.c_str());
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& splits) {
  const bq::ExperimentConfig cfg = bq::parse_config_file(config_path);
  const auto rows = bq::split_sweep(cfg, splits);
  std::printf("%-8s %-14s %s\n", "split", "mean|err|", "std");
  for (const auto& row : rows)
    std::printf("%-8.4g %-14.6g %.6g\n", row.split, row.mean_error, row.std_error);
  if (!cfg.output.empty()) {
    FILE* f = std::fopen((cfg.output + "_splits.csv").c_str(), "w");
    if (!f) throw std::runtime_error("cannot open output file");
    std::fprintf(f, "split,mean_error,std_error\n");
    for (const auto& row : rows)
      std::fprintf(f, "%.17g,%.17g,%.17g\n", row.split, row.mean_error, row.std_error);
    std::fclose(f);
    std::printf("wrote %s_splits.csv\n", cfg.output.c_str());
  }
  return 0;
}

int cmd_fit(const std::string& input, int t_min_cut) {
  const auto records = bq::read_csv(input);
  const auto cells = bq::aggregate(records);
  print_fits(bq::fit_all_scalings(cells, t_min_cut));
  return 0;
}

int cmd_oracle(const bq::IntegrandSpec& ispec, const bq::WeightSpec& wspec,
               const bq::OracleConfig& ocfg) {
  const bq::Integrand f = bq::build_integrand(ispec);
  const bq::WeightDensity w = bq::build_weight(wspec, f.dim);
  const auto [value, err] = bq::ground_truth(f, ispec, w, ocfg);
  std::printf("I = %.17g\nerr_estimate = %.17g\n", value, err);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noisy Bayesian quadrature experiments"};
  app.require_subcommand(1);

  std::string config_path;
  int t_min_cut = 16;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "config file (key = value)")->required();
  run->add_option("--t-min", t_min_cut, "smallest checkpoint used in scaling fits");

  std::string sweep_config;
  std::vector<double> splits{0.0, 0.25, 0.5, 0.75, 1.0};
  auto* sweep = app.add_subcommand("sweep-splits", "sweep the MVS fraction of MVS-MC");
  sweep->add_option("--config", sweep_config, "config file")->required();
  sweep->add_option("--splits", splits, "split fractions in [0,1]")->delimiter(',');

  std::string fit_input;
  int fit_t_min = 16;
  auto* fit = app.add_subcommand("fit", "fit scaling slopes from an emitted CSV");
  fit->add_option("--input", fit_input, "CSV produced by `bq run`")->required();
  fit->add_option("--t-min", fit_t_min, "smallest checkpoint used in the fit");

  bq::IntegrandSpec ispec;
  bq::WeightSpec wspec;
  bq::OracleConfig ocfg;
  std::string oracle_method = "auto";
  auto* oracle = app.add_subcommand("oracle", "print the ground-truth integral of an integrand");
  oracle->add_option("--integrand", ispec.kind, "synthetic|benchmark|constant|bump|sensor")
      ->required();
  oracle->add_option("--dim", ispec.dim, "domain dimension");
  oracle->add_option("--name", ispec.name, "benchmark name");
  oracle->add_option("--value", ispec.value, "constant value");
  oracle->add_option("--path", ispec.path, "sensor CSV path");
  oracle->add_option("--m", ispec.m, "synthetic centers (0: 30*dim)");
  oracle->add_option("--m-target", ispec.m_target, "bump count target");
  oracle->add_option("--norm-bound", ispec.norm_bound, "bump norm budget");
  oracle->add_option("--seed", ispec.seed, "construction seed");
  oracle->add_option("--weight", wspec.kind, "uniform|truncated-gaussian");
  oracle->add_option("--method", oracle_method, "auto|adaptive-1d|tensor-gauss|qmc");
  oracle->add_option("--abs-tol", ocfg.abs_tol, "absolute tolerance");
  oracle->add_option("--budget", ocfg.points_budget, "points budget");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, t_min_cut);
    if (*sweep) return cmd_sweep(sweep_config, splits);
    if (*fit) return cmd_fit(fit_input, fit_t_min);
    if (*oracle) {
      if (oracle_method == "adaptive-1d") ocfg.method = bq::OracleMethod::kAdaptive1d;
      else if (oracle_method == "tensor-gauss") ocfg.method = bq::OracleMethod::kTensorGauss;
      else if (oracle_method == "qmc") ocfg.method = bq::OracleMethod::kQmc;
      else if (oracle_method != "auto") throw std::invalid_argument("unknown oracle method");
      return cmd_oracle(ispec, wspec, ocfg);
    }
  } catch (const bq::OracleFailure& e) {
    std::fprintf(stderr, "oracle failure: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
