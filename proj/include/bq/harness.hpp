#ifndef BQ_HARNESS_HPP
#define BQ_HARNESS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bq/gp.hpp"
#include "bq/integrands.hpp"
#include "bq/oracle.hpp"
#include "bq/quadrature.hpp"

namespace bq {

// Config-level description of the integrand under test.
struct IntegrandSpec {
  std::string kind = "synthetic";  // synthetic | benchmark | constant | bump | sensor
  int dim = 1;
  std::string name = "ackley";  // benchmark name
  double value = 0.3;           // constant value
  std::string path;             // sensor CSV path
  int m = 0;                    // synthetic centers; 0 means 30 * dim
  int m_target = 16;            // bump count target
  double norm_bound = 1.0;      // bump norm budget B
  std::uint64_t seed = 17;      // construction stream (centers / signs)
  KernelSpec sample_kernel{1.5, 0.03, 2.0};  // synthetic sampling kernel
};

struct WeightSpec {
  std::string kind = "uniform";  // uniform | truncated-gaussian
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

struct ExperimentConfig {
  IntegrandSpec integrand;
  WeightSpec weight;
  std::vector<StrategyConfig> strategies;  // kinds to run, shared T/split knobs
  std::vector<double> sigmas{0.05};
  int T_max = 250;
  std::vector<int> checkpoints{4, 8, 16, 32, 64, 125, 250};
  int n_trials = 100;
  std::uint64_t root_seed = 1;
  OracleConfig oracle;
  std::string output;  // base path; emit writes <output>.csv / <output>.json
  KernelSpec gp_kernel{1.5, 0.03, 2.0};
  bool learn_hyperparams = false;  // refit (lengthscale, scale) per trial on init data
  FitBounds fit_bounds;
  int workers = 0;  // 0: BQ_WORKERS env or hardware concurrency

  void validate() const;
};

struct TrialRecord {
  std::string strategy;
  double sigma = 0.0;
  int trial = 0;
  std::vector<int> checkpoints;
  std::vector<double> abs_errors;  // |I_hat_t - I| per checkpoint
  double final_abs_error = 0.0;
  double wall_time_sec = 0.0;
  bool failed = false;
  std::string error;
};

struct AggregateCell {
  std::string strategy;
  double sigma = 0.0;
  int t = 0;
  double mean_error = 0.0;
  double std_error = 0.0;  // sample std across trials
  int n = 0;
};

struct ScalingFit {
  std::string strategy;
  double sigma = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int t_lo = 0, t_hi = 0;  // checkpoint range used
  bool valid = false;      // false: degenerate errors or too few checkpoints
};

struct ExperimentResult {
  ExperimentConfig config;
  double ground_truth = 0.0;
  double ground_truth_err = 0.0;
  std::vector<TrialRecord> records;
};

// Ground-truth failure (distinct so the CLI can exit with code 2).
struct OracleFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Integrand build_integrand(const IntegrandSpec& spec);
WeightDensity build_weight(const WeightSpec& spec, int dim);

// Ground truth I: exact by construction where available (constant always;
// bump/sensor under uniform weight), otherwise the quadrature oracle.
std::pair<double, double> ground_truth(const Integrand& f, const IntegrandSpec& spec,
                                       const WeightDensity& weight, const OracleConfig& cfg);

// One (strategy, sigma, trial) cell; seed streams derive from
// (root_seed, sigma index, trial) so runs are reproducible slot by slot.
// The full trace is exposed on request.
TrialRecord run_single_trial(const ExperimentConfig& cfg, const StrategyConfig& strategy,
                             int sigma_idx, int trial, const Integrand& f,
                             const WeightDensity& weight, double truth,
                             EstimateTrace* trace_out = nullptr);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::vector<AggregateCell> aggregate(const std::vector<TrialRecord>& records);

// OLS of log2(mean error) on log2(t) over checkpoints >= t_min_cut.
ScalingFit fit_scaling(const std::vector<AggregateCell>& cells, const std::string& strategy,
                       double sigma, int t_min_cut = 16);
std::vector<ScalingFit> fit_all_scalings(const std::vector<AggregateCell>& cells,
                                         int t_min_cut = 16);

struct SplitSweepRow {
  double split = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
};

// Final-error mean/std of MVS-MC per split fraction, identical seeds per
// column, so rho = 0 and rho = 1 reproduce plain MC and MVS runs.
std::vector<SplitSweepRow> split_sweep(const ExperimentConfig& cfg,
                                       const std::vector<double>& splits);

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_csv(const std::string& path);
void emit_json(const ExperimentResult& result, const std::vector<AggregateCell>& cells,
               const std::vector<ScalingFit>& fits, const std::string& path);

// Plain key = value config text (see README for the schema).
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace bq

#endif  // BQ_HARNESS_HPP
