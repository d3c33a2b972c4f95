#include "bq/integrands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bq/oracle.hpp"

namespace bq {

namespace {

double norm_cdf(double t) { return 0.5 * std::erfc(-t * M_SQRT1_2); }
double norm_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); }

void check_finite(const Eigen::VectorXd& x, const char* who) {
  if (!x.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace

WeightDensity make_weight(WeightKind kind, int dim, const Eigen::VectorXd& mean,
                          const Eigen::VectorXd& stddev) {
  if (dim < 1) throw std::invalid_argument("make_weight: dim must be >= 1");
  WeightDensity w;
  w.dim = dim;
  if (kind == WeightKind::kUniform) {
    w.is_uniform = true;
    w.p_max = 1.0;
    w.density = [](const Eigen::VectorXd&) { return 1.0; };
    w.sample = [dim](Rng& rng) {
      Eigen::VectorXd x(dim);
      for (int i = 0; i < dim; ++i) x[i] = rng.uniform01();
      return x;
    };
    return w;
  }

  auto broadcast = [dim](const Eigen::VectorXd& v, double fallback) {
    if (v.size() == 0) return Eigen::VectorXd::Constant(dim, fallback).eval();
    if (v.size() == 1) return Eigen::VectorXd::Constant(dim, v[0]).eval();
    if (v.size() != dim) throw std::invalid_argument("make_weight: parameter size mismatch");
    return v.eval();
  };
  const Eigen::VectorXd mu = broadcast(mean, 0.5);
  const Eigen::VectorXd sd = broadcast(stddev, 0.25);
  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) {
    if (!(sd[i] > 0.0)) throw std::invalid_argument("make_weight: stddev must be > 0");
    z[i] = norm_cdf((1.0 - mu[i]) / sd[i]) - norm_cdf((0.0 - mu[i]) / sd[i]);
    if (!(z[i] > 1e-6))
      throw std::invalid_argument("make_weight: truncated-gaussian mass on [0,1] too small");
  }
  w.density = [dim, mu, sd, z](const Eigen::VectorXd& x) {
    double p = 1.0;
    for (int i = 0; i < dim; ++i) {
      if (x[i] < 0.0 || x[i] > 1.0) return 0.0;
      p *= norm_pdf((x[i] - mu[i]) / sd[i]) / (sd[i] * z[i]);
    }
    return p;
  };
  double pmax = 1.0;
  for (int i = 0; i < dim; ++i) {
    const double mode = std::clamp(mu[i], 0.0, 1.0);
    pmax *= norm_pdf((mode - mu[i]) / sd[i]) / (sd[i] * z[i]);
  }
  w.p_max = pmax;
  w.sample = [dim, mu, sd](Rng& rng) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) {
      double g;
      do {
        g = rng.gauss(mu[i], sd[i]);
      } while (g < 0.0 || g > 1.0);
      x[i] = g;
    }
    return x;
  };
  return w;
}

Integrand make_synthetic(int dim, int m, const KernelSpec& kernel, Rng& rng,
                         Eigen::MatrixXd* centers_out, Eigen::VectorXd* coeffs_out) {
  kernel.validate();
  if (dim < 1 || m < 0) throw std::invalid_argument("make_synthetic: bad dim or m");
  Eigen::MatrixXd centers(dim, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < dim; ++i) centers(i, j) = rng.uniform01();
  Eigen::VectorXd coeffs(m);
  for (int j = 0; j < m; ++j) coeffs[j] = rng.uniform(-1.0, 1.0);
  if (centers_out) *centers_out = centers;
  if (coeffs_out) *coeffs_out = coeffs;

  Integrand f;
  f.dim = dim;
  const Eigen::MatrixXd k = kernel_matrix(kernel, centers);
  f.rkhs_norm_bound = std::sqrt(std::max(0.0, coeffs.dot(k * coeffs)));
  f.eval = [dim, centers, coeffs, kernel](const Eigen::VectorXd& x) {
    check_finite(x, "synthetic");
    if (x.size() != dim) throw std::invalid_argument("synthetic: dimension mismatch");
    if (coeffs.size() == 0) return 0.0;
    return kernel_cross(kernel, centers, x).dot(coeffs);
  };
  if (m == 0) f.true_integral = 0.0;
  return f;
}

namespace {

// Canonical domains; inputs live on [0,1]^d and are mapped affinely.
Eigen::VectorXd rescale(const Eigen::VectorXd& x, double lo, double hi) {
  return (lo + (hi - lo) * x.array()).matrix();
}

double ackley(const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = rescale(x, -32.768, 32.768);
  const int d = static_cast<int>(z.size());
  const double s1 = z.squaredNorm() / d;
  const double s2 = (2.0 * M_PI * z.array()).cos().sum() / d;
  return -20.0 * std::exp(-0.2 * std::sqrt(s1)) - std::exp(s2) + 20.0 + std::exp(1.0);
}

double alpine(const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = rescale(x, -10.0, 10.0);
  return (z.array() * z.array().sin() + 0.1 * z.array()).abs().sum();
}

double gramacy_lee(const Eigen::VectorXd& x) {
  const double z = 0.5 + 2.0 * x[0];
  return std::sin(10.0 * M_PI * z) / (2.0 * z) + std::pow(z - 1.0, 4.0);
}

double griewank(const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = rescale(x, -600.0, 600.0);
  double prod = 1.0;
  for (int i = 0; i < z.size(); ++i) prod *= std::cos(z[i] / std::sqrt(i + 1.0));
  return z.squaredNorm() / 4000.0 - prod + 1.0;
}

double rastrigin(const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = rescale(x, -5.12, 5.12);
  return 10.0 * z.size() + (z.array().square() - 10.0 * (2.0 * M_PI * z.array()).cos()).sum();
}

double keane(const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = rescale(x, 0.0, 10.0);
  const double r = z.norm();
  if (r == 0.0) return 0.0;
  const double s = std::sin(z[0] - z[1]) * std::sin(z[0] + z[1]);
  return -s * s / r;
}

}  // namespace

Integrand make_benchmark(const std::string& name, int dim) {
  if (dim < 1) throw std::invalid_argument("make_benchmark: dim must be >= 1");
  std::function<double(const Eigen::VectorXd&)> fn;
  if (name == "ackley")
    fn = ackley;
  else if (name == "alpine")
    fn = alpine;
  else if (name == "gramacy-lee")
    fn = gramacy_lee;
  else if (name == "griewank")
    fn = griewank;
  else if (name == "rastrigin")
    fn = rastrigin;
  else if (name == "keane")
    fn = keane;
  else
    throw std::invalid_argument("make_benchmark: unknown name '" + name + "'");
  if (name == "gramacy-lee" && dim != 1)
    throw std::invalid_argument("make_benchmark: gramacy-lee is 1-D");
  if (name == "keane" && dim != 2) throw std::invalid_argument("make_benchmark: keane is 2-D");

  Integrand f;
  f.dim = dim;
  f.eval = [fn, dim, name](const Eigen::VectorXd& x) {
    check_finite(x, "benchmark");
    if (x.size() != dim) throw std::invalid_argument("benchmark: dimension mismatch");
    return fn(x);
  };
  return f;
}

Integrand make_constant(int dim, double c) {
  if (dim < 1) throw std::invalid_argument("make_constant: dim must be >= 1");
  Integrand f;
  f.dim = dim;
  f.true_integral = c;  // any normalized weight integrates a constant to c
  f.eval = [c](const Eigen::VectorXd& x) {
    check_finite(x, "constant");
    return c;
  };
  return f;
}

double bump_profile(const Eigen::VectorXd& x) {
  const double r2 = x.squaredNorm();
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

namespace {

constexpr double kBumpPeak = 0.36787944117144233;  // h0(0) = exp(-1)

std::vector<Eigen::VectorXi> multi_indices_up_to(int dim, int order) {
  std::vector<Eigen::VectorXi> out;
  Eigen::VectorXi alpha = Eigen::VectorXi::Zero(dim);
  while (true) {
    if (alpha.sum() <= order) out.push_back(alpha);
    int k = 0;
    while (k < dim && ++alpha[k] > order) alpha[k++] = 0;
    if (k == dim) break;
  }
  return out;
}

// Nested central differences for the mixed partial d^alpha h0 at x.
double bump_derivative_fd(Eigen::VectorXd& x, Eigen::VectorXi& alpha, double h) {
  int axis = -1;
  for (int i = 0; i < alpha.size(); ++i)
    if (alpha[i] > 0) {
      axis = i;
      break;
    }
  if (axis < 0) return bump_profile(x);
  alpha[axis] -= 1;
  x[axis] += h;
  const double fp = bump_derivative_fd(x, alpha, h);
  x[axis] -= 2.0 * h;
  const double fm = bump_derivative_fd(x, alpha, h);
  x[axis] += h;
  alpha[axis] += 1;
  return (fp - fm) / (2.0 * h);
}

// sum over |alpha| <= order of (2/w)^{2|alpha|} J_alpha with
// J_alpha = int_{B(0,1)} |d^alpha h0|^2. The J table is cached per (dim, order).
const std::vector<std::pair<int, double>>& bump_derivative_table(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({dim, order});
  if (it != cache.end()) return it->second;

  const int n = dim == 1 ? 4096 : (dim == 2 ? 192 : 48);
  const double cell = 2.0 / n;
  const double fd_step = 2e-3;
  std::vector<std::pair<int, double>> table;
  for (auto& alpha : multi_indices_up_to(dim, order)) {
    double acc = 0.0;
    Eigen::VectorXd u(dim);
    std::vector<int> idx(dim, 0);
    while (true) {
      for (int k = 0; k < dim; ++k) u[k] = -1.0 + (idx[k] + 0.5) * cell;
      if (u.squaredNorm() < 1.0 + 4.0 * fd_step) {
        Eigen::VectorXi a = alpha;
        Eigen::VectorXd up = u;
        const double dv = bump_derivative_fd(up, a, fd_step);
        acc += dv * dv;
      }
      int k = 0;
      while (k < dim && ++idx[k] == n) idx[k++] = 0;
      if (k == dim) break;
    }
    table.emplace_back(alpha.sum(), acc * std::pow(cell, dim));
  }
  return cache[{dim, order}] = std::move(table);
}

double unit_bump_integral(int dim) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(dim);
  if (it != cache.end()) return it->second;
  OracleConfig cfg;
  cfg.abs_tol = 1e-12;
  const OracleResult res =
      integrate_box([](const Eigen::VectorXd& u) { return bump_profile(u); }, dim, cfg,
                    Eigen::VectorXd::Constant(dim, -1.0), Eigen::VectorXd::Ones(dim));
  return cache[dim] = res.value;
}

int sobolev_order(int dim, double nu) {
  const double s = nu + 0.5 * dim;
  const double r = std::round(s);
  return std::abs(s - r) < 1e-12 ? static_cast<int>(r) : static_cast<int>(std::ceil(s));
}

}  // namespace

double bump_class_surrogate_norm(int dim, double nu, double width, double eps, int count) {
  const int order = sobolev_order(dim, nu);
  double sum = 0.0;
  for (const auto& [total_order, j_alpha] : bump_derivative_table(dim, order))
    sum += std::pow(2.0 / width, 2 * total_order) * j_alpha;
  const double g0_norm =
      (eps / kBumpPeak) * std::pow(0.5 * width, 0.5 * dim) * std::sqrt(sum);
  return std::sqrt(static_cast<double>(count)) * g0_norm;
}

Eigen::VectorXd bump_center(const BumpClassSpec& spec, int i) {
  if (i < 0 || i >= spec.count) throw std::out_of_range("bump_center: index out of range");
  const int per_axis = static_cast<int>(std::lround(1.0 / spec.width));
  Eigen::VectorXd c(spec.dim);
  for (int k = 0; k < spec.dim; ++k) {
    c[k] = (i % per_axis + 0.5) * spec.width;
    i /= per_axis;
  }
  return c;
}

std::pair<Integrand, BumpClassSpec> make_bump_class(int dim, double nu, double norm_bound,
                                                    int m_target, const Eigen::VectorXi& signs) {
  if (dim < 1 || m_target < 1) throw std::invalid_argument("make_bump_class: bad dim or target");
  if (m_target > 1000000)
    throw std::invalid_argument("make_bump_class: target exceeds the grid-resolution cap (1e6)");
  if (!(nu > 0.0) || !(norm_bound > 0.0))
    throw std::invalid_argument("make_bump_class: nu and norm bound must be > 0");

  const int per_axis =
      static_cast<int>(std::ceil(std::pow(static_cast<double>(m_target), 1.0 / dim) - 1e-9));
  BumpClassSpec spec;
  spec.dim = dim;
  spec.width = 1.0 / per_axis;
  spec.count = 1;
  for (int k = 0; k < dim; ++k) spec.count *= per_axis;
  if (signs.size() != spec.count)
    throw std::invalid_argument("make_bump_class: need exactly " + std::to_string(spec.count) +
                                " signs");
  for (int i = 0; i < signs.size(); ++i)
    if (signs[i] != 1 && signs[i] != -1)
      throw std::invalid_argument("make_bump_class: signs must be +1 or -1");
  spec.signs = signs;

  // Height from the norm budget: eps such that sqrt(M) ||g0||_{W_2^s} stays
  // just inside norm_bound. This realizes eps = B c0 M^{-nu/d - 1/2} with c0
  // calibrated from the numerically evaluated derivative integrals.
  const double unit_norm = bump_class_surrogate_norm(dim, nu, spec.width, 1.0, spec.count);
  spec.eps = 0.995 * norm_bound / unit_norm;

  spec.per_bump_integral =
      (spec.eps / kBumpPeak) * std::pow(0.5 * spec.width, dim) * unit_bump_integral(dim);

  Integrand f;
  f.dim = dim;
  f.rkhs_norm_bound = norm_bound;
  f.true_integral = spec.per_bump_integral * spec.signs.cast<double>().sum();
  const BumpClassSpec fspec = spec;
  f.eval = [fspec, per_axis](const Eigen::VectorXd& x) {
    check_finite(x, "bump_class");
    if (x.size() != fspec.dim) throw std::invalid_argument("bump_class: dimension mismatch");
    int flat = 0, stride = 1;
    Eigen::VectorXd u(fspec.dim);
    for (int k = 0; k < fspec.dim; ++k) {
      int c = static_cast<int>(std::floor(x[k] / fspec.width));
      c = std::clamp(c, 0, per_axis - 1);
      flat += stride * c;
      stride *= per_axis;
      u[k] = 2.0 * (x[k] - (c + 0.5) * fspec.width) / fspec.width;
    }
    const double b = bump_profile(u);
    if (b == 0.0) return 0.0;
    return fspec.signs[flat] * fspec.eps * b / kBumpPeak;
  };
  return {std::move(f), std::move(spec)};
}

std::pair<Integrand, BumpClassSpec> make_bump_class(int dim, double nu, double norm_bound,
                                                    int m_target, Rng& rng) {
  const int per_axis =
      static_cast<int>(std::ceil(std::pow(static_cast<double>(m_target), 1.0 / dim) - 1e-9));
  int count = 1;
  for (int k = 0; k < dim; ++k) count *= per_axis;
  Eigen::VectorXi signs(count);
  for (int i = 0; i < count; ++i) signs[i] = rng.uniform01() < 0.5 ? -1 : 1;
  return make_bump_class(dim, nu, norm_bound, m_target, signs);
}

SignGame::SignGame(double eps, double sigma, Eigen::VectorXi signs, double per_bump_integral)
    : eps_(eps), sigma_(sigma), signs_(std::move(signs)), per_bump_integral_(per_bump_integral) {
  if (!(eps_ > 0.0) || sigma_ < 0.0) throw std::invalid_argument("SignGame: bad eps or sigma");
  for (int i = 0; i < signs_.size(); ++i)
    if (signs_[i] != 1 && signs_[i] != -1)
      throw std::invalid_argument("SignGame: signs must be +1 or -1");
}

double sign_game_query(const SignGame& game, int i, Rng& rng) {
  if (i < 1 || i > game.count()) throw std::out_of_range("sign_game_query: index out of range");
  const double noise = game.sigma() > 0.0 ? rng.gauss(0.0, game.sigma()) : 0.0;
  return game.eps() * game.signs()[i - 1] + noise;
}

SignGame sign_game_from_bumps(const BumpClassSpec& spec, double sigma) {
  return SignGame(spec.eps, sigma, spec.signs, spec.per_bump_integral);
}

namespace {

// days-from-civil; used to turn ISO-8601 timestamps into epoch seconds
long long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

bool parse_timestamp(const std::string& field, double& out) {
  int y, mo, d, h = 0, mi = 0;
  double sec = 0.0;
  std::istringstream ss(field);
  if (ss >> y && ss.get() == '-' && ss >> mo && ss.get() == '-' && ss >> d) {
    const int sep = ss.get();
    if (sep == 'T' || sep == ' ') {
      if (!(ss >> h) || ss.get() != ':' || !(ss >> mi)) return false;
      if (ss.peek() == ':') {
        ss.get();
        if (!(ss >> sec)) return false;
      }
    } else if (sep != std::istringstream::traits_type::eof()) {
      return false;
    }
    out = static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
    return true;
  }
  return false;
}

}  // namespace

Integrand load_sensor_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_sensor_series: cannot open '" + path + "'");

  std::vector<double> stamps, values;
  bool have_iso = false, have_index = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("load_sensor_series: line " + std::to_string(line_no) +
                               ": expected two comma-separated columns");
    const std::string ts_field = line.substr(0, comma);
    const std::string val_field = line.substr(comma + 1);

    double stamp = 0.0;
    bool iso = parse_timestamp(ts_field, stamp);
    bool index = false;
    if (!iso) {
      try {
        size_t pos = 0;
        stamp = std::stod(ts_field, &pos);
        index = pos == ts_field.size() ||
                ts_field.find_first_not_of(" \t", pos) == std::string::npos;
      } catch (const std::exception&) {
        index = false;
      }
    }
    if (!iso && !index) {
      if (line_no == 1) continue;  // header row
      throw std::runtime_error("load_sensor_series: line " + std::to_string(line_no) +
                               ": unparseable timestamp '" + ts_field + "'");
    }

    double value;
    try {
      size_t pos = 0;
      value = std::stod(val_field, &pos);
      if (val_field.find_first_not_of(" \t", pos) != std::string::npos)
        throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      if (line_no == 1 && !have_iso && !have_index) continue;  // header row
      throw std::runtime_error("load_sensor_series: line " + std::to_string(line_no) +
                               ": unparseable value '" + val_field + "'");
    }
    if (!std::isfinite(value))
      throw std::runtime_error("load_sensor_series: line " + std::to_string(line_no) +
                               ": non-finite value");
    have_iso |= iso;
    have_index |= !iso;
    stamps.push_back(stamp);
    values.push_back(value);
  }
  if (values.empty()) throw std::runtime_error("load_sensor_series: no data rows in '" + path + "'");

  if (have_iso && !have_index) {
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return stamps[a] < stamps[b]; });
    std::vector<double> sorted_stamps(values.size()), sorted_values(values.size());
    for (size_t i = 0; i < order.size(); ++i) {
      sorted_stamps[i] = stamps[order[i]];
      sorted_values[i] = values[order[i]];
    }
    // resample to hourly means only when the series is denser than hourly
    double median_gap = 3600.0;
    if (sorted_stamps.size() > 1) {
      std::vector<double> gaps(sorted_stamps.size() - 1);
      for (size_t i = 0; i + 1 < sorted_stamps.size(); ++i)
        gaps[i] = sorted_stamps[i + 1] - sorted_stamps[i];
      std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
      median_gap = gaps[gaps.size() / 2];
    }
    if (median_gap < 3600.0 - 1e-9) {
      std::vector<double> hourly;
      long long bucket = -1;
      double acc = 0.0;
      int n_in = 0;
      for (size_t i = 0; i < sorted_stamps.size(); ++i) {
        const long long h = static_cast<long long>(std::floor(sorted_stamps[i] / 3600.0));
        if (h != bucket && n_in > 0) {
          hourly.push_back(acc / n_in);
          acc = 0.0;
          n_in = 0;
        }
        bucket = h;
        acc += sorted_values[i];
        ++n_in;
      }
      if (n_in > 0) hourly.push_back(acc / n_in);
      values = std::move(hourly);
    } else {
      values = std::move(sorted_values);
    }
  }

  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  Integrand f;
  f.dim = 1;
  f.true_integral = mean;
  const auto series = std::make_shared<std::vector<double>>(std::move(values));
  f.eval = [series](const Eigen::VectorXd& x) {
    check_finite(x, "sensor");
    const int n = static_cast<int>(series->size());
    if (n == 1) return (*series)[0];
    const int i =
        std::clamp(static_cast<int>(std::lround(x[0] * (n - 1))), 0, n - 1);
    return (*series)[i];
  };
  return f;
}

}  // namespace bq
