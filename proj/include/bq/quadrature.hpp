#ifndef BQ_QUADRATURE_HPP
#define BQ_QUADRATURE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "bq/gp.hpp"
#include "bq/integrands.hpp"

namespace bq {

enum class StrategyKind { kMc, kMvs, kMvsMc };

StrategyKind strategy_from_name(const std::string& name);
std::string strategy_name(StrategyKind kind);

struct GpConfig {
  KernelSpec spec;
  double lambda = 1e-2;  // regularizer; the harness defaults it to sigma^2
};

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kMvsMc;
  int budget = 250;          // T
  double split = 0.5;        // MVS fraction rho; floor(rho T) goes to batch 1
  bool interleave = false;   // alternate MVS/MC draws; final estimate unchanged
  int candidate_count = 0;   // variance-argmax grid size; 0 means 2048 * dim
  double gamma = 1.0;        // accept any candidate with var >= gamma * max
  int n_init = 3;            // random initial points, counted against batch 1

  void validate() const;
};

struct EstimateTrace {
  std::vector<int> checkpoints;    // t values at which estimates were formed
  std::vector<double> estimates;   // running estimate at each checkpoint
  double final_estimate = 0.0;     // I_hat
  double initial_estimate = 0.0;   // I_hat_1 (posterior-mean integral)
  double residual_estimate = 0.0;  // R_hat
  Eigen::MatrixXd points;          // dim x T, in query order
  Eigen::VectorXd observations;    // length T
  std::vector<std::uint8_t> is_mvs;  // batch membership per step
};

// Deterministic low-discrepancy candidate grid shared by all MVS runs.
Eigen::MatrixXd candidate_grid(int dim, int count);

// Candidate whose posterior sd is within a factor gamma of the best; gamma=1
// gives the exact candidate argmax with lowest-index tie-breaking.
int select_max_variance_index(const GpState& state, const Eigen::MatrixXd& candidates,
                              double gamma);
Eigen::VectorXd select_max_variance(const GpState& state, const Eigen::MatrixXd& candidates,
                                    double gamma);

// Plain Monte Carlo: x_t ~ p, I_hat = mean(y).
EstimateTrace run_mc(NoisyOracle& oracle, const WeightDensity& weight, int budget, Rng& rng,
                     std::span<const int> checkpoints = {});

// Maximum-variance sampling for the full budget, then I_hat = int p mu_T.
EstimateTrace run_mvs(NoisyOracle& oracle, const WeightDensity& weight,
                      const StrategyConfig& cfg, const GpConfig& gp, Rng& rng,
                      std::span<const int> checkpoints = {},
                      const Eigen::MatrixXd* init_points = nullptr,
                      const Eigen::VectorXd* init_values = nullptr);

// Two-batch estimator: batch 1 builds mu by MVS, batch 2 Monte Carlo
// estimates the residual; I_hat = I_hat_1 + R_hat. Degenerate splits reduce
// exactly to run_mc (rho = 0) and run_mvs (rho = 1).
EstimateTrace run_mvs_mc(NoisyOracle& oracle, const WeightDensity& weight,
                         const StrategyConfig& cfg, const GpConfig& gp, Rng& rng,
                         std::span<const int> checkpoints = {},
                         const Eigen::MatrixXd* init_points = nullptr,
                         const Eigen::VectorXd* init_values = nullptr);

// int p(x) mu(x) dx: adaptive quadrature for d = 1 with uniform weight,
// otherwise 1e5 low-discrepancy points (times density for uniform weight,
// weight-sampled with a fixed stream otherwise). Deterministic in the state.
double integrate_posterior_mean(const GpState& state, const WeightDensity& weight);

// Analytic residual-variance bound (4 p_max / T) l2_err_sq + 2 sigma^2 / T,
// with T = 2 * second_batch_count the full budget. Test-suite companion for
// the empirical Var[R_hat].
double residual_variance_bound(double p_max, int second_batch_count, double l2_err_sq,
                               double sigma);

}  // namespace bq

#endif  // BQ_QUADRATURE_HPP
