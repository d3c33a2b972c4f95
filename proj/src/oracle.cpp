#include "bq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "bq/sobol.hpp"

namespace bq {

void OracleConfig::validate(int dim) const {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("OracleConfig: abs_tol must be > 0");
  if (method == OracleMethod::kTensorGauss && dim > 3)
    throw std::invalid_argument("OracleConfig: tensor-gauss supports d <= 3 only");
  if (method == OracleMethod::kAdaptive1d && dim != 1)
    throw std::invalid_argument("OracleConfig: adaptive-1d requires d == 1");
  if (method == OracleMethod::kQmc && points_budget < 10000)
    throw std::invalid_argument("OracleConfig: qmc budget must be >= 1e4");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::pair<Eigen::VectorXd, Eigen::VectorXd>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
  }
  Eigen::VectorXd x(n), w(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
  std::lock_guard<std::mutex> lock(mu);
  cache[n] = {x, w};
  return cache[n];
}

namespace {

struct Segment {
  double a, b, value, err;
};

// GL7 and GL15 on one segment; err = |difference|.
Segment eval_segment(const ScalarFn1d& f, double a, double b, long& evals) {
  static const auto lo_rule = gauss_legendre(7);
  static const auto hi_rule = gauss_legendre(15);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double q_lo = 0.0, q_hi = 0.0;
  for (int i = 0; i < 7; ++i) q_lo += lo_rule.second[i] * f(c + h * lo_rule.first[i]);
  for (int i = 0; i < 15; ++i) q_hi += hi_rule.second[i] * f(c + h * hi_rule.first[i]);
  evals += 22;
  return {a, b, q_hi * h, std::abs(q_hi - q_lo) * h};
}

}  // namespace

OracleResult integrate_adaptive_1d(const ScalarFn1d& f, double a, double b, double abs_tol,
                                   long max_evals, int presplit) {
  if (!(b > a)) return {0.0, 0.0, true};
  long evals = 0;
  std::vector<Segment> active;
  const int n0 = std::max(1, presplit);
  for (int i = 0; i < n0; ++i)
    active.push_back(eval_segment(f, a + (b - a) * i / n0, a + (b - a) * (i + 1) / n0, evals));

  double done_value = 0.0, done_err = 0.0;
  std::vector<Segment> work = std::move(active);
  // Bisect the worst segments until every local error fits its share of the
  // tolerance (allocated proportionally to segment length).
  while (!work.empty()) {
    std::vector<Segment> next;
    for (const Segment& s : work) {
      const double local_tol = abs_tol * (s.b - s.a) / (b - a);
      if (s.err <= local_tol || (s.b - s.a) < 1e-14 * (b - a) || evals >= max_evals) {
        done_value += s.value;
        done_err += s.err;
      } else {
        const double mid = 0.5 * (s.a + s.b);
        next.push_back(eval_segment(f, s.a, mid, evals));
        next.push_back(eval_segment(f, mid, s.b, evals));
      }
    }
    work = std::move(next);
  }
  return {done_value, done_err, done_err <= abs_tol * 1.001};
}

namespace {

OracleResult integrate_tensor_gauss(const ScalarField& f, int dim, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi) {
  auto tensor = [&](int order) {
    const auto [nodes, weights] = gauss_legendre(order);
    double total = 0.0;
    Eigen::VectorXd x(dim);
    std::vector<int> idx(dim, 0);
    while (true) {
      double w = 1.0;
      for (int k = 0; k < dim; ++k) {
        const double half = 0.5 * (hi[k] - lo[k]);
        x[k] = lo[k] + half * (1.0 + nodes[idx[k]]);
        w *= weights[idx[k]] * half;
      }
      total += w * f(x);
      int k = 0;
      while (k < dim && ++idx[k] == order) idx[k++] = 0;
      if (k == dim) break;
    }
    return total;
  };
  const double coarse = tensor(32);
  const double fine = tensor(48);
  return {fine, std::abs(fine - coarse), true};
}

OracleResult integrate_qmc(const ScalarField& f, int dim, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, long budget) {
  constexpr int kShifts = 8;
  const long n_per = std::max<long>(budget / kShifts, 1);
  double volume = 1.0;
  for (int k = 0; k < dim; ++k) volume *= hi[k] - lo[k];
  Eigen::VectorXd means(kShifts);
  for (int s = 0; s < kShifts; ++s) {
    SobolSequence seq(dim, 0x9d2c5680ULL + s);
    double acc = 0.0;
    Eigen::VectorXd x(dim);
    for (long i = 0; i < n_per; ++i) {
      const Eigen::VectorXd u = seq.next();
      for (int k = 0; k < dim; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * u[k];
      acc += f(x);
    }
    means[s] = volume * acc / static_cast<double>(n_per);
  }
  const double value = means.mean();
  const double sd = std::sqrt((means.array() - value).square().sum() / (kShifts - 1));
  return {value, sd / std::sqrt(static_cast<double>(kShifts)), true};
}

}  // namespace

OracleResult integrate_box(const ScalarField& f, int dim, const OracleConfig& cfg,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  cfg.validate(dim);
  OracleMethod method = cfg.method;
  if (method == OracleMethod::kAuto)
    method = dim == 1 ? OracleMethod::kAdaptive1d
                      : (dim <= 3 ? OracleMethod::kTensorGauss : OracleMethod::kQmc);
  switch (method) {
    case OracleMethod::kAdaptive1d:
      return integrate_adaptive_1d([&](double t) { return f(Eigen::VectorXd::Constant(1, t)); },
                                   lo[0], hi[0], cfg.abs_tol, cfg.points_budget);
    case OracleMethod::kTensorGauss:
      return integrate_tensor_gauss(f, dim, lo, hi);
    case OracleMethod::kQmc:
      return integrate_qmc(f, dim, lo, hi, cfg.points_budget);
    default:
      throw std::logic_error("integrate_box: unreachable");
  }
}

OracleResult integrate(const Integrand& f, const WeightDensity& weight, const OracleConfig& cfg) {
  if (f.dim != weight.dim) throw std::invalid_argument("integrate: integrand/weight dim mismatch");
  ScalarField g;
  if (weight.is_uniform)
    g = f.eval;
  else
    g = [&f, &weight](const Eigen::VectorXd& x) { return f.eval(x) * weight.density(x); };
  return integrate_box(g, f.dim, cfg, Eigen::VectorXd::Zero(f.dim),
                       Eigen::VectorXd::Ones(f.dim));
}

}  // namespace bq
