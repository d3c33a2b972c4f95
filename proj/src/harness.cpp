#include "bq/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace bq {

void ExperimentConfig::validate() const {
  if (n_trials < 1) throw std::invalid_argument("config: n_trials must be >= 1");
  if (T_max < 1) throw std::invalid_argument("config: T_max must be >= 1");
  if (strategies.empty()) throw std::invalid_argument("config: no strategies");
  if (sigmas.empty()) throw std::invalid_argument("config: no sigmas");
  for (double s : sigmas)
    if (s < 0.0) throw std::invalid_argument("config: sigma must be >= 0");
  for (int t : checkpoints)
    if (t < 1 || t > T_max)
      throw std::invalid_argument("config: checkpoints must lie in [1, T_max]");
  gp_kernel.validate();
}

Integrand build_integrand(const IntegrandSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("integrand: dim must be >= 1");
  if (spec.kind == "synthetic") {
    Rng rng(spec.seed);
    const int m = spec.m > 0 ? spec.m : 30 * spec.dim;
    return make_synthetic(spec.dim, m, spec.sample_kernel, rng);
  }
  if (spec.kind == "benchmark") return make_benchmark(spec.name, spec.dim);
  if (spec.kind == "constant") return make_constant(spec.dim, spec.value);
  if (spec.kind == "bump") {
    Rng rng(spec.seed);
    return make_bump_class(spec.dim, spec.sample_kernel.nu, spec.norm_bound, spec.m_target, rng)
        .first;
  }
  if (spec.kind == "sensor") return load_sensor_series(spec.path);
  throw std::invalid_argument("integrand: unknown kind '" + spec.kind + "'");
}

WeightDensity build_weight(const WeightSpec& spec, int dim) {
  if (spec.kind == "uniform") return make_weight(WeightKind::kUniform, dim);
  if (spec.kind == "truncated-gaussian")
    return make_weight(WeightKind::kTruncatedGaussian, dim, spec.mean, spec.stddev);
  throw std::invalid_argument("weight: unknown kind '" + spec.kind + "'");
}

std::pair<double, double> ground_truth(const Integrand& f, const IntegrandSpec& spec,
                                       const WeightDensity& weight, const OracleConfig& cfg) {
  const bool exact_always = spec.kind == "constant";
  const bool exact_uniform = spec.kind == "bump" || spec.kind == "sensor";
  if (f.true_integral && (exact_always || (exact_uniform && weight.is_uniform)))
    return {*f.true_integral, 0.0};
  const OracleResult res = integrate(f, weight, cfg);
  if (!res.converged)
    throw OracleFailure("ground truth did not converge (err estimate " +
                        std::to_string(res.err_estimate) + ")");
  return {res.value, res.err_estimate};
}

namespace {

int resolve_workers(int configured) {
  if (const char* env = std::getenv("BQ_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  if (configured >= 1) return configured;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

struct TrialTask {
  int strategy_idx;
  int sigma_idx;
  int trial;
};

}  // namespace

TrialRecord run_single_trial(const ExperimentConfig& cfg, const StrategyConfig& strategy,
                             int sigma_idx, int trial, const Integrand& f,
                             const WeightDensity& weight, double truth,
                             EstimateTrace* trace_out) {
  StrategyConfig scfg = strategy;
  scfg.budget = cfg.T_max;
  const double sigma = cfg.sigmas.at(sigma_idx);
  TrialRecord rec;
  rec.strategy = strategy_name(scfg.kind);
  rec.sigma = sigma;
  rec.trial = trial;

  const auto start = std::chrono::steady_clock::now();
  try {
    // Seed streams are keyed by (sigma, trial) only, so MVS and MVS-MC see
    // the same initial points and noise, and split endpoints reproduce the
    // plain MC / MVS runs.
    Rng init_rng(derive_seed(cfg.root_seed, 1, sigma_idx, trial));
    Rng sampler_rng(derive_seed(cfg.root_seed, 2, sigma_idx, trial));
    NoisyOracle oracle(f, sigma, derive_seed(cfg.root_seed, 3, sigma_idx, trial));

    GpConfig gp;
    gp.spec = cfg.gp_kernel;
    gp.lambda = std::max(sigma * sigma, 1e-12);

    const int batch1 = static_cast<int>(std::floor(scfg.split * scfg.budget + 1e-9));
    const bool uses_init = scfg.kind == StrategyKind::kMvs ||
                           (scfg.kind == StrategyKind::kMvsMc && batch1 > 0);

    EstimateTrace trace;
    if (!uses_init) {
      if (scfg.kind == StrategyKind::kMc) {
        trace = run_mc(oracle, weight, scfg.budget, sampler_rng, cfg.checkpoints);
      } else {
        trace = run_mvs_mc(oracle, weight, scfg, gp, sampler_rng, cfg.checkpoints);
      }
    } else {
      const int n_init = std::min(scfg.n_init, scfg.kind == StrategyKind::kMvs
                                                   ? scfg.budget
                                                   : std::min(batch1, scfg.budget));
      Eigen::MatrixXd init_xs(f.dim, n_init);
      Eigen::VectorXd init_ys(n_init);
      for (int j = 0; j < n_init; ++j) {
        for (int i = 0; i < f.dim; ++i) init_xs(i, j) = init_rng.uniform01();
        init_ys[j] = oracle.query(init_xs.col(j));
      }
      if (cfg.learn_hyperparams && n_init >= 3)
        gp.spec =
            fit_hyperparams(init_xs, init_ys, cfg.gp_kernel.nu, gp.lambda, cfg.fit_bounds);
      if (scfg.kind == StrategyKind::kMvs)
        trace = run_mvs(oracle, weight, scfg, gp, sampler_rng, cfg.checkpoints, &init_xs,
                        &init_ys);
      else
        trace = run_mvs_mc(oracle, weight, scfg, gp, sampler_rng, cfg.checkpoints, &init_xs,
                           &init_ys);
    }

    rec.checkpoints = trace.checkpoints;
    rec.abs_errors.resize(trace.estimates.size());
    for (std::size_t i = 0; i < trace.estimates.size(); ++i)
      rec.abs_errors[i] = std::abs(trace.estimates[i] - truth);
    rec.final_abs_error = std::abs(trace.final_estimate - truth);
    if (trace_out) *trace_out = std::move(trace);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  rec.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Integrand f = build_integrand(cfg.integrand);
  const WeightDensity weight = build_weight(cfg.weight, f.dim);
  const auto [truth, truth_err] = ground_truth(f, cfg.integrand, weight, cfg.oracle);

  std::vector<TrialTask> tasks;
  for (int s = 0; s < static_cast<int>(cfg.strategies.size()); ++s)
    for (int q = 0; q < static_cast<int>(cfg.sigmas.size()); ++q)
      for (int k = 0; k < cfg.n_trials; ++k) tasks.push_back({s, q, k});

  ExperimentResult result;
  result.config = cfg;
  result.ground_truth = truth;
  result.ground_truth_err = truth_err;
  result.records.resize(tasks.size());

  auto run_task = [&](const TrialTask& task, TrialRecord& rec) {
    rec = run_single_trial(cfg, cfg.strategies[task.strategy_idx], task.sigma_idx, task.trial, f,
                           weight, truth);
  };

  const int workers = std::min<int>(resolve_workers(cfg.workers), static_cast<int>(tasks.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(tasks[i], result.records[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) break;
          run_task(tasks[i], result.records[i]);
        }
      });
    for (auto& th : pool) th.join();
  }
  return result;
}

std::vector<AggregateCell> aggregate(const std::vector<TrialRecord>& records) {
  std::map<std::tuple<std::string, double, int>, std::pair<std::vector<double>, int>> cells;
  for (const TrialRecord& rec : records) {
    if (rec.failed) continue;
    for (std::size_t i = 0; i < rec.checkpoints.size(); ++i)
      cells[{rec.strategy, rec.sigma, rec.checkpoints[i]}].first.push_back(rec.abs_errors[i]);
  }
  std::vector<AggregateCell> out;
  out.reserve(cells.size());
  for (const auto& [key, bucket] : cells) {
    const auto& errs = bucket.first;
    AggregateCell cell;
    cell.strategy = std::get<0>(key);
    cell.sigma = std::get<1>(key);
    cell.t = std::get<2>(key);
    cell.n = static_cast<int>(errs.size());
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= cell.n;
    double ss = 0.0;
    for (double e : errs) ss += (e - mean) * (e - mean);
    cell.mean_error = mean;
    cell.std_error = cell.n > 1 ? std::sqrt(ss / (cell.n - 1)) : 0.0;
    out.push_back(cell);
  }
  return out;
}

ScalingFit fit_scaling(const std::vector<AggregateCell>& cells, const std::string& strategy,
                       double sigma, int t_min_cut) {
  ScalingFit fit;
  fit.strategy = strategy;
  fit.sigma = sigma;
  std::vector<std::pair<double, double>> pts;  // (log2 t, log2 mean_error)
  for (const AggregateCell& c : cells) {
    if (c.strategy != strategy || c.sigma != sigma || c.t < t_min_cut) continue;
    if (c.mean_error <= 0.0) return fit;  // degenerate: flagged invalid
    pts.emplace_back(std::log2(static_cast<double>(c.t)), std::log2(c.mean_error));
    fit.t_lo = fit.t_lo == 0 ? c.t : std::min(fit.t_lo, c.t);
    fit.t_hi = std::max(fit.t_hi, c.t);
  }
  if (pts.size() < 4) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double n = static_cast<double>(pts.size());
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0;
  for (auto [x, y] : pts) {
    const double r = y - (fit.slope * x + fit.intercept);
    ss_res += r * r;
  }
  const double ss_tot = syy - sy * sy / n;
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.valid = true;
  return fit;
}

std::vector<ScalingFit> fit_all_scalings(const std::vector<AggregateCell>& cells, int t_min_cut) {
  std::vector<std::pair<std::string, double>> keys;
  for (const AggregateCell& c : cells) {
    std::pair<std::string, double> key{c.strategy, c.sigma};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<ScalingFit> fits;
  for (const auto& [strategy, sigma] : keys)
    fits.push_back(fit_scaling(cells, strategy, sigma, t_min_cut));
  return fits;
}

std::vector<SplitSweepRow> split_sweep(const ExperimentConfig& cfg,
                                       const std::vector<double>& splits) {
  for (double s : splits)
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("split_sweep: splits must lie in [0,1]");
  StrategyConfig base = cfg.strategies.empty() ? StrategyConfig{} : cfg.strategies.front();
  std::vector<SplitSweepRow> rows;
  for (double split : splits) {
    ExperimentConfig sub = cfg;
    base.kind = StrategyKind::kMvsMc;
    base.split = split;
    sub.strategies = {base};
    sub.sigmas = {cfg.sigmas.front()};
    const ExperimentResult res = run_experiment(sub);
    double mean = 0.0;
    int n = 0;
    for (const TrialRecord& rec : res.records)
      if (!rec.failed) {
        mean += rec.final_abs_error;
        ++n;
      }
    if (n == 0) throw std::runtime_error("split_sweep: all trials failed at split " +
                                         std::to_string(split));
    mean /= n;
    double ss = 0.0;
    for (const TrialRecord& rec : res.records)
      if (!rec.failed) ss += (rec.final_abs_error - mean) * (rec.final_abs_error - mean);
    rows.push_back({split, mean, n > 1 ? std::sqrt(ss / (n - 1)) : 0.0});
  }
  return rows;
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "'");
  out << "strategy,sigma,trial,t,abs_error\n";
  for (const TrialRecord& rec : records) {
    if (rec.failed) continue;
    for (std::size_t i = 0; i < rec.checkpoints.size(); ++i)
      out << rec.strategy << ',' << fmt17(rec.sigma) << ',' << rec.trial << ','
          << rec.checkpoints[i] << ',' << fmt17(rec.abs_errors[i]) << '\n';
  }
  if (!out) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file");
  std::map<std::tuple<std::string, double, int>, TrialRecord> grouped;
  std::vector<std::tuple<std::string, double, int>> order;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string strategy, field;
    if (!std::getline(ss, strategy, ',')) continue;
    double sigma, err;
    int trial, t;
    try {
      std::getline(ss, field, ',');
      sigma = std::stod(field);
      std::getline(ss, field, ',');
      trial = std::stoi(field);
      std::getline(ss, field, ',');
      t = std::stoi(field);
      std::getline(ss, field, ',');
      err = std::stod(field);
    } catch (const std::exception&) {
      throw std::runtime_error("read_csv: malformed line " + std::to_string(line_no));
    }
    const std::tuple<std::string, double, int> key{strategy, sigma, trial};
    auto it = grouped.find(key);
    if (it == grouped.end()) {
      TrialRecord rec;
      rec.strategy = strategy;
      rec.sigma = sigma;
      rec.trial = trial;
      it = grouped.emplace(key, std::move(rec)).first;
      order.push_back(key);
    }
    it->second.checkpoints.push_back(t);
    it->second.abs_errors.push_back(err);
    it->second.final_abs_error = err;
  }
  std::vector<TrialRecord> out;
  out.reserve(order.size());
  for (const auto& key : order) out.push_back(std::move(grouped[key]));
  return out;
}

namespace {

nlohmann::json strategy_json(const StrategyConfig& s) {
  return {{"kind", strategy_name(s.kind)},   {"budget", s.budget},
          {"split", s.split},                {"interleave", s.interleave},
          {"candidate_count", s.candidate_count}, {"gamma", s.gamma},
          {"n_init", s.n_init}};
}

std::string oracle_method_name(OracleMethod m) {
  switch (m) {
    case OracleMethod::kAuto: return "auto";
    case OracleMethod::kAdaptive1d: return "adaptive-1d";
    case OracleMethod::kTensorGauss: return "tensor-gauss";
    case OracleMethod::kQmc: return "qmc";
  }
  return "?";
}

}  // namespace

void emit_json(const ExperimentResult& result, const std::vector<AggregateCell>& cells,
               const std::vector<ScalingFit>& fits, const std::string& path) {
  const ExperimentConfig& cfg = result.config;
  nlohmann::json j;
  j["config"] = {
      {"integrand",
       {{"kind", cfg.integrand.kind},
        {"dim", cfg.integrand.dim},
        {"name", cfg.integrand.name},
        {"value", cfg.integrand.value},
        {"path", cfg.integrand.path},
        {"m", cfg.integrand.m},
        {"m_target", cfg.integrand.m_target},
        {"norm_bound", cfg.integrand.norm_bound},
        {"seed", cfg.integrand.seed}}},
      {"weight", {{"kind", cfg.weight.kind}}},
      {"sigmas", cfg.sigmas},
      {"T_max", cfg.T_max},
      {"checkpoints", cfg.checkpoints},
      {"n_trials", cfg.n_trials},
      {"root_seed", cfg.root_seed},
      {"gp_kernel",
       {{"nu", cfg.gp_kernel.nu},
        {"lengthscale", cfg.gp_kernel.lengthscale},
        {"scale", cfg.gp_kernel.scale}}},
      {"learn_hyperparams", cfg.learn_hyperparams},
      {"oracle",
       {{"method", oracle_method_name(cfg.oracle.method)},
        {"abs_tol", cfg.oracle.abs_tol},
        {"points_budget", cfg.oracle.points_budget}}},
  };
  j["config"]["strategies"] = nlohmann::json::array();
  for (const StrategyConfig& s : cfg.strategies) j["config"]["strategies"].push_back(strategy_json(s));
  j["ground_truth"] = {{"value", result.ground_truth}, {"err_estimate", result.ground_truth_err}};

  j["aggregates"] = nlohmann::json::array();
  for (const AggregateCell& c : cells)
    j["aggregates"].push_back({{"strategy", c.strategy},
                               {"sigma", c.sigma},
                               {"t", c.t},
                               {"mean_error", c.mean_error},
                               {"std_error", c.std_error},
                               {"n", c.n}});
  j["fits"] = nlohmann::json::array();
  for (const ScalingFit& fit : fits)
    j["fits"].push_back({{"strategy", fit.strategy},
                         {"sigma", fit.sigma},
                         {"slope", fit.slope},
                         {"intercept", fit.intercept},
                         {"r2", fit.r2},
                         {"t_lo", fit.t_lo},
                         {"t_hi", fit.t_hi},
                         {"valid", fit.valid}});
  int n_failed = 0;
  for (const TrialRecord& rec : result.records) n_failed += rec.failed ? 1 : 0;
  j["n_failed_trials"] = n_failed;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_json: cannot open '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("emit_json: write failed for '" + path + "'");
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& value) {
  const auto items = split_list(value);
  Eigen::VectorXd v(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) v[i] = std::stod(items[i]);
  return v;
}

OracleMethod parse_oracle_method(const std::string& s) {
  if (s == "auto") return OracleMethod::kAuto;
  if (s == "adaptive-1d") return OracleMethod::kAdaptive1d;
  if (s == "tensor-gauss") return OracleMethod::kTensorGauss;
  if (s == "qmc") return OracleMethod::kQmc;
  throw std::invalid_argument("config: unknown oracle method '" + s + "'");
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("config: expected a boolean, got '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.strategies.clear();
  StrategyConfig proto;
  std::vector<std::string> strategy_names{"mc", "mvs", "mvs-mc"};
  bool lengthscale_set = false;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                    ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "integrand") cfg.integrand.kind = value;
      else if (key == "dim") cfg.integrand.dim = std::stoi(value);
      else if (key == "integrand.name") cfg.integrand.name = value;
      else if (key == "integrand.value") cfg.integrand.value = std::stod(value);
      else if (key == "integrand.path") cfg.integrand.path = value;
      else if (key == "integrand.m") cfg.integrand.m = std::stoi(value);
      else if (key == "integrand.m_target") cfg.integrand.m_target = std::stoi(value);
      else if (key == "integrand.norm_bound") cfg.integrand.norm_bound = std::stod(value);
      else if (key == "integrand.seed") cfg.integrand.seed = std::stoull(value);
      else if (key == "integrand.kernel.nu") cfg.integrand.sample_kernel.nu = std::stod(value);
      else if (key == "integrand.kernel.lengthscale")
        cfg.integrand.sample_kernel.lengthscale = std::stod(value);
      else if (key == "integrand.kernel.scale")
        cfg.integrand.sample_kernel.scale = std::stod(value);
      else if (key == "weight") cfg.weight.kind = value;
      else if (key == "weight.mean") cfg.weight.mean = parse_vector(value);
      else if (key == "weight.stddev") cfg.weight.stddev = parse_vector(value);
      else if (key == "strategies") strategy_names = split_list(value);
      else if (key == "split") proto.split = std::stod(value);
      else if (key == "interleave") proto.interleave = parse_bool(value);
      else if (key == "candidate_count") proto.candidate_count = std::stoi(value);
      else if (key == "gamma") proto.gamma = std::stod(value);
      else if (key == "n_init") proto.n_init = std::stoi(value);
      else if (key == "sigmas") {
        cfg.sigmas.clear();
        for (const auto& s : split_list(value)) cfg.sigmas.push_back(std::stod(s));
      } else if (key == "T_max") cfg.T_max = std::stoi(value);
      else if (key == "checkpoints") {
        cfg.checkpoints.clear();
        for (const auto& s : split_list(value)) cfg.checkpoints.push_back(std::stoi(s));
      } else if (key == "n_trials") cfg.n_trials = std::stoi(value);
      else if (key == "root_seed") cfg.root_seed = std::stoull(value);
      else if (key == "oracle.method") cfg.oracle.method = parse_oracle_method(value);
      else if (key == "oracle.abs_tol") cfg.oracle.abs_tol = std::stod(value);
      else if (key == "oracle.points_budget") cfg.oracle.points_budget = std::stol(value);
      else if (key == "output") cfg.output = value;
      else if (key == "kernel.nu") cfg.gp_kernel.nu = std::stod(value);
      else if (key == "kernel.lengthscale") {
        cfg.gp_kernel.lengthscale = std::stod(value);
        lengthscale_set = true;
      } else if (key == "kernel.scale") cfg.gp_kernel.scale = std::stod(value);
      else if (key == "kernel.learn") cfg.learn_hyperparams = parse_bool(value);
      else if (key == "fit.lengthscale_lo") cfg.fit_bounds.lengthscale_lo = std::stod(value);
      else if (key == "fit.lengthscale_hi") cfg.fit_bounds.lengthscale_hi = std::stod(value);
      else if (key == "fit.scale_lo") cfg.fit_bounds.scale_lo = std::stod(value);
      else if (key == "fit.scale_hi") cfg.fit_bounds.scale_hi = std::stod(value);
      else if (key == "workers") cfg.workers = std::stoi(value);
      else
        throw std::invalid_argument("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  ": bad value for '" + key + "'");
    }
  }
  // There is no sensible default lengthscale; demand one unless it is
  // learned per trial anyway.
  if (!cfg.learn_hyperparams && !lengthscale_set)
    throw std::invalid_argument(
        "config: kernel.lengthscale is required unless kernel.learn = true");
  for (const std::string& name : strategy_names) {
    StrategyConfig s = proto;
    s.kind = strategy_from_name(name);
    cfg.strategies.push_back(s);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace bq
