#ifndef BQ_INTEGRANDS_HPP
#define BQ_INTEGRANDS_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "bq/kernel.hpp"
#include "bq/rng.hpp"

namespace bq {

// Deterministic black-box function on [0,1]^dim.
struct Integrand {
  int dim = 1;
  std::function<double(const Eigen::VectorXd&)> eval;
  std::optional<double> rkhs_norm_bound;
  // Uniform-weight integral when it is known exactly by construction.
  std::optional<double> true_integral;
};

// Known bounded density p on [0,1]^dim with a sampler.
struct WeightDensity {
  int dim = 1;
  std::function<double(const Eigen::VectorXd&)> density;
  double p_max = 1.0;
  std::function<Eigen::VectorXd(Rng&)> sample;
  bool is_uniform = false;
};

enum class WeightKind { kUniform, kTruncatedGaussian };

WeightDensity make_weight(WeightKind kind, int dim,
                          const Eigen::VectorXd& mean = Eigen::VectorXd(),
                          const Eigen::VectorXd& stddev = Eigen::VectorXd());

// Noisy query wrapper: y = f(x) + N(0, sigma^2), one stream per oracle.
class NoisyOracle {
 public:
  NoisyOracle(Integrand f, double sigma, std::uint64_t seed)
      : f_(std::move(f)), sigma_(sigma), rng_(seed) {}

  double query(const Eigen::VectorXd& x) {
    return f_.eval(x) + (sigma_ > 0.0 ? rng_.gauss(0.0, sigma_) : 0.0);
  }

  const Integrand& integrand() const { return f_; }
  double sigma() const { return sigma_; }

 private:
  Integrand f_;
  double sigma_;
  Rng rng_;
};

// f(x) = sum_i a_i k(x_i, x) with centers uniform on [0,1]^dim and
// coefficients uniform on [-1,1]; rkhs_norm_bound = sqrt(a' K a).
// The drawn centers/coefficients are exposed on request.
Integrand make_synthetic(int dim, int m, const KernelSpec& kernel, Rng& rng,
                         Eigen::MatrixXd* centers_out = nullptr,
                         Eigen::VectorXd* coeffs_out = nullptr);

// Standard benchmark functions rescaled to [0,1]^dim:
// ackley, alpine, gramacy-lee (1-D), griewank, rastrigin, keane (2-D).
Integrand make_benchmark(const std::string& name, int dim);

Integrand make_constant(int dim, double c);

// Unit bump profile h0(x) = exp(-1/(1-|x|^2)) on the open unit ball.
double bump_profile(const Eigen::VectorXd& x);

// Grid of sign-flipped disjoint bumps: diameter w = 1/ceil(m_target^(1/d)),
// count M = floor(1/w)^d, height eps chosen so the Sobolev surrogate norm of
// the sum stays within norm_bound.
struct BumpClassSpec {
  int dim = 1;
  double width = 0.0;            // bump diameter w (also the grid step)
  int count = 0;                 // M
  double eps = 0.0;              // bump height
  Eigen::VectorXi signs;         // entries in {-1, +1}, size M
  double per_bump_integral = 0;  // I0
};

Eigen::VectorXd bump_center(const BumpClassSpec& spec, int i);

// sqrt(M) * ||g0||_{W_2^s} for the bump of diameter `width` and height
// `eps`, with derivative L2 integrals evaluated on a fine grid.
double bump_class_surrogate_norm(int dim, double nu, double width, double eps, int count);

std::pair<Integrand, BumpClassSpec> make_bump_class(int dim, double nu, double norm_bound,
                                                    int m_target, const Eigen::VectorXi& signs);
std::pair<Integrand, BumpClassSpec> make_bump_class(int dim, double nu, double norm_bound,
                                                    int m_target, Rng& rng);

// Discrete hard instance: query an index, observe eps * S_i + noise,
// estimate I0 * sum_i S_i.
class SignGame {
 public:
  SignGame(double eps, double sigma, Eigen::VectorXi signs, double per_bump_integral);

  int count() const { return static_cast<int>(signs_.size()); }
  double eps() const { return eps_; }
  double sigma() const { return sigma_; }
  double per_bump_integral() const { return per_bump_integral_; }
  const Eigen::VectorXi& signs() const { return signs_; }
  double target() const { return per_bump_integral_ * signs_.cast<double>().sum(); }

 private:
  double eps_;
  double sigma_;
  Eigen::VectorXi signs_;
  double per_bump_integral_;
};

// One noisy draw at 1-based index i.
double sign_game_query(const SignGame& game, int i, Rng& rng);

SignGame sign_game_from_bumps(const BumpClassSpec& spec, double sigma);

// 1-D integrand over [0,1] mapping x to the nearest sample of a
// (timestamp, value) CSV series; true_integral is the series mean.
// If ISO-8601 timestamps are denser than hourly, the series is resampled
// to hourly bucket means.
Integrand load_sensor_series(const std::string& path);

}  // namespace bq

#endif  // BQ_INTEGRANDS_HPP
