#include "bq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bq/oracle.hpp"
#include "bq/sobol.hpp"

namespace bq {

StrategyKind strategy_from_name(const std::string& name) {
  if (name == "mc") return StrategyKind::kMc;
  if (name == "mvs") return StrategyKind::kMvs;
  if (name == "mvs-mc") return StrategyKind::kMvsMc;
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

std::string strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kMc: return "mc";
    case StrategyKind::kMvs: return "mvs";
    case StrategyKind::kMvsMc: return "mvs-mc";
  }
  return "?";
}

void StrategyConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("StrategyConfig: budget must be >= 1");
  if (split < 0.0 || split > 1.0) throw std::invalid_argument("StrategyConfig: split in [0,1]");
  if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("StrategyConfig: gamma in (0,1]");
  if (candidate_count < 0) throw std::invalid_argument("StrategyConfig: candidate_count >= 0");
  if (n_init < 0) throw std::invalid_argument("StrategyConfig: n_init >= 0");
}

Eigen::MatrixXd candidate_grid(int dim, int count) {
  if (count < 1) throw std::invalid_argument("candidate_grid: count must be >= 1");
  return SobolSequence(dim).take(count);
}

namespace {

int pick_index(const Eigen::VectorXd& variances, double gamma) {
  int best = 0;
  double best_var = variances[0];
  for (int j = 1; j < variances.size(); ++j)
    if (variances[j] > best_var) {
      best_var = variances[j];
      best = j;
    }
  if (gamma >= 1.0) return best;
  const double threshold = gamma * best_var;
  for (int j = 0; j < variances.size(); ++j)
    if (variances[j] >= threshold) return j;
  return best;
}

// Incremental candidate-variance bookkeeping for MVS rounds: keeps
// V = L^{-1} K(X_t, C) so each round costs O(N t) instead of O(N t^2).
// Selection only reads variances, so the chosen sequence never depends on
// the observed values.
class MvsSampler {
 public:
  MvsSampler(GpState state, Eigen::MatrixXd candidates, int max_rounds)
      : state_(std::move(state)), cands_(std::move(candidates)) {
    const int n = static_cast<int>(cands_.cols());
    v_.resize(state_.size() + max_rounds, n);
    cand_var_ = Eigen::VectorXd::Constant(n, state_.spec().scale);
    if (state_.size() > 0) rebuild();
  }

  const GpState& state() const { return state_; }
  const Eigen::VectorXd& candidate_variances() const { return cand_var_; }

  int select(double gamma) const { return pick_index(cand_var_, gamma); }
  Eigen::VectorXd candidate(int j) const { return cands_.col(j); }

  void add(const Eigen::VectorXd& x, std::optional<double> y) {
    const int t = state_.size();
    Eigen::VectorXd white;
    if (t > 0) white = state_.whitened_cross(x);
    GpState next = state_.extend(x, y);
    const bool jittered = next.lambda() != state_.lambda();
    state_ = std::move(next);
    if (jittered) {
      rebuild();
      return;
    }
    const double diag = state_.chol()(t, t);
    Eigen::VectorXd row = kernel_cross(state_.spec(), cands_, x);
    if (t > 0) row.noalias() -= v_.topRows(t).transpose() * white;
    row /= diag;
    v_.row(t) = row.transpose();
    cand_var_ -= row.cwiseProduct(row);
    cand_var_ = cand_var_.cwiseMax(0.0);
  }

 private:
  void rebuild() {
    const int t = state_.size();
    const int n = static_cast<int>(cands_.cols());
    Eigen::MatrixXd kxc(t, n);
    for (int j = 0; j < n; ++j) kxc.col(j) = kernel_cross(state_.spec(), state_.points(), cands_.col(j));
    state_.chol().triangularView<Eigen::Lower>().solveInPlace(kxc);
    v_.topRows(t) = kxc;
    cand_var_ = (Eigen::VectorXd::Constant(n, state_.spec().scale) -
                 kxc.colwise().squaredNorm().transpose())
                    .cwiseMax(0.0);
  }

  GpState state_;
  Eigen::MatrixXd cands_;
  Eigen::MatrixXd v_;
  Eigen::VectorXd cand_var_;
};

std::vector<int> usable_checkpoints(std::span<const int> checkpoints, int budget) {
  std::vector<int> out;
  for (int t : checkpoints)
    if (t >= 1 && t <= budget) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

int select_max_variance_index(const GpState& state, const Eigen::MatrixXd& candidates,
                              double gamma) {
  if (candidates.cols() < 1)
    throw std::invalid_argument("select_max_variance: candidates must be nonempty");
  Eigen::VectorXd variances(candidates.cols());
  for (int j = 0; j < candidates.cols(); ++j) variances[j] = state.posterior_var(candidates.col(j));
  return pick_index(variances, gamma);
}

Eigen::VectorXd select_max_variance(const GpState& state, const Eigen::MatrixXd& candidates,
                                    double gamma) {
  return candidates.col(select_max_variance_index(state, candidates, gamma));
}

EstimateTrace run_mc(NoisyOracle& oracle, const WeightDensity& weight, int budget, Rng& rng,
                     std::span<const int> checkpoints) {
  if (budget < 1) throw std::invalid_argument("run_mc: budget must be >= 1");
  const int dim = oracle.integrand().dim;
  EstimateTrace trace;
  trace.checkpoints = usable_checkpoints(checkpoints, budget);
  trace.points.resize(dim, budget);
  trace.observations.resize(budget);
  trace.is_mvs.assign(budget, 0);

  double sum = 0.0;
  std::size_t next_cp = 0;
  for (int t = 1; t <= budget; ++t) {
    const Eigen::VectorXd x = weight.sample(rng);
    const double y = oracle.query(x);
    trace.points.col(t - 1) = x;
    trace.observations[t - 1] = y;
    sum += y;
    if (next_cp < trace.checkpoints.size() && trace.checkpoints[next_cp] == t) {
      trace.estimates.push_back(sum / t);
      ++next_cp;
    }
  }
  trace.final_estimate = sum / budget;
  trace.residual_estimate = trace.final_estimate;  // mu == 0, I_hat_1 == 0
  return trace;
}

namespace {

// Shared MVS/MVS-MC round loop. `mvs_budget` rounds go through the sampler
// (the first few being the initial design), the rest are weight-sampled
// Monte Carlo draws; `schedule[t]` says which kind step t+1 is.
EstimateTrace run_batched(NoisyOracle& oracle, const WeightDensity& weight,
                          const StrategyConfig& cfg, const GpConfig& gp, Rng& rng,
                          std::span<const int> checkpoints, const Eigen::MatrixXd* init_points,
                          const Eigen::VectorXd* init_values, const std::vector<char>& schedule,
                          int mvs_budget) {
  const int dim = oracle.integrand().dim;
  const int budget = cfg.budget;
  const int n_cand = cfg.candidate_count > 0 ? cfg.candidate_count : 2048 * dim;
  const int n_init = std::min(cfg.n_init, mvs_budget);
  if (init_points && init_points->cols() < n_init)
    throw std::invalid_argument("run: fewer init points than n_init");
  if (init_values && init_values->size() < n_init)
    throw std::invalid_argument("run: fewer init values than n_init");

  EstimateTrace trace;
  trace.checkpoints = usable_checkpoints(checkpoints, budget);
  trace.points.resize(dim, budget);
  trace.observations.resize(budget);
  trace.is_mvs.assign(budget, 0);

  // The initial design is drawn up front so the rng sees the same draw
  // sequence whether or not the schedule interleaves.
  Eigen::MatrixXd init_xs(dim, n_init);
  if (init_points) {
    init_xs = init_points->leftCols(n_init);
  } else {
    for (int j = 0; j < n_init; ++j)
      for (int k = 0; k < dim; ++k) init_xs(k, j) = rng.uniform01();
  }

  MvsSampler sampler(GpState(gp.spec, gp.lambda), candidate_grid(dim, n_cand), mvs_budget);
  std::vector<Eigen::VectorXd> mc_xs;
  std::vector<double> mc_ys;
  mc_xs.reserve(budget - mvs_budget);
  mc_ys.reserve(budget - mvs_budget);

  auto running_estimate = [&](double& initial, double& residual) {
    initial = sampler.state().size() > 0 ? integrate_posterior_mean(sampler.state(), weight) : 0.0;
    residual = 0.0;
    if (!mc_xs.empty()) {
      double acc = 0.0;
      for (std::size_t s = 0; s < mc_xs.size(); ++s)
        acc += mc_ys[s] - (sampler.state().size() > 0 ? sampler.state().posterior_mean(mc_xs[s]) : 0.0);
      residual = acc / static_cast<double>(mc_xs.size());
    }
    return initial + residual;
  };

  int mvs_done = 0;
  std::size_t next_cp = 0;
  for (int t = 1; t <= budget; ++t) {
    Eigen::VectorXd x;
    double y;
    if (schedule[t - 1]) {
      if (mvs_done < n_init) {
        x = init_xs.col(mvs_done);
        y = init_values ? (*init_values)[mvs_done] : oracle.query(x);
      } else {
        x = sampler.candidate(sampler.select(cfg.gamma));
        y = oracle.query(x);
      }
      sampler.add(x, y);
      ++mvs_done;
      trace.is_mvs[t - 1] = 1;
    } else {
      x = weight.sample(rng);
      y = oracle.query(x);
      mc_xs.push_back(x);
      mc_ys.push_back(y);
    }
    trace.points.col(t - 1) = x;
    trace.observations[t - 1] = y;
    if (next_cp < trace.checkpoints.size() && trace.checkpoints[next_cp] == t) {
      double initial, residual;
      trace.estimates.push_back(running_estimate(initial, residual));
      ++next_cp;
    }
  }
  trace.final_estimate = running_estimate(trace.initial_estimate, trace.residual_estimate);
  return trace;
}

}  // namespace

EstimateTrace run_mvs(NoisyOracle& oracle, const WeightDensity& weight, const StrategyConfig& cfg,
                      const GpConfig& gp, Rng& rng, std::span<const int> checkpoints,
                      const Eigen::MatrixXd* init_points, const Eigen::VectorXd* init_values) {
  cfg.validate();
  std::vector<char> schedule(cfg.budget, 1);
  return run_batched(oracle, weight, cfg, gp, rng, checkpoints, init_points, init_values,
                     schedule, cfg.budget);
}

EstimateTrace run_mvs_mc(NoisyOracle& oracle, const WeightDensity& weight,
                         const StrategyConfig& cfg, const GpConfig& gp, Rng& rng,
                         std::span<const int> checkpoints, const Eigen::MatrixXd* init_points,
                         const Eigen::VectorXd* init_values) {
  cfg.validate();
  const int batch1 = static_cast<int>(std::floor(cfg.split * cfg.budget + 1e-9));
  if (batch1 <= 0) return run_mc(oracle, weight, cfg.budget, rng, checkpoints);
  if (batch1 >= cfg.budget)
    return run_mvs(oracle, weight, cfg, gp, rng, checkpoints, init_points, init_values);

  std::vector<char> schedule(cfg.budget, 0);
  if (cfg.interleave) {
    for (int t = 1; t <= cfg.budget; ++t) {
      const long long hi = static_cast<long long>(std::floor(cfg.split * t + 1e-9));
      const long long lo = static_cast<long long>(std::floor(cfg.split * (t - 1) + 1e-9));
      schedule[t - 1] = hi > lo ? 1 : 0;
    }
  } else {
    std::fill(schedule.begin(), schedule.begin() + batch1, 1);
  }
  return run_batched(oracle, weight, cfg, gp, rng, checkpoints, init_points, init_values,
                     schedule, batch1);
}

double integrate_posterior_mean(const GpState& state, const WeightDensity& weight) {
  if (state.size() == 0) return 0.0;
  if (!state.has_values())
    throw std::logic_error("integrate_posterior_mean: state has no observations");
  const int dim = state.dim();
  if (dim == 1 && weight.is_uniform) {
    auto mu = [&state](double t) {
      return state.posterior_mean(Eigen::VectorXd::Constant(1, t));
    };
    return integrate_adaptive_1d(mu, 0.0, 1.0, 1e-8).value;
  }
  constexpr int kPoints = 100000;
  double acc = 0.0;
  if (weight.is_uniform) {
    SobolSequence seq(dim);
    for (int i = 0; i < kPoints; ++i) acc += state.posterior_mean(seq.next());
  } else {
    Rng local(0x1a7eb2c3d4e5f601ULL);  // fixed stream: deterministic in the state
    for (int i = 0; i < kPoints; ++i) acc += state.posterior_mean(weight.sample(local));
  }
  return acc / kPoints;
}

double residual_variance_bound(double p_max, int second_batch_count, double l2_err_sq,
                               double sigma) {
  if (p_max < 0.0 || second_batch_count < 1 || l2_err_sq < 0.0 || sigma < 0.0)
    throw std::invalid_argument("residual_variance_bound: nonnegative inputs required");
  const double full_budget = 2.0 * second_batch_count;
  return 4.0 * p_max * l2_err_sq / full_budget + 2.0 * sigma * sigma / full_budget;
}

}  // namespace bq
