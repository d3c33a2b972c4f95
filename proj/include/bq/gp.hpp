#ifndef BQ_GP_HPP
#define BQ_GP_HPP

#include <Eigen/Dense>

#include <optional>
#include <utility>

#include "bq/kernel.hpp"

namespace bq {

// Regularized GP regression state: posterior mean and variance through the
// Cholesky factor of (K_t + lambda I). Immutable after construction; extend()
// returns a new state sharing no mutable data, so states can be used freely
// across workers.
class GpState {
 public:
  GpState(KernelSpec spec, double lambda);
  GpState(KernelSpec spec, double lambda, Eigen::MatrixXd xs,
          std::optional<Eigen::VectorXd> ys);

  int size() const { return static_cast<int>(xs_.cols()); }
  int dim() const { return static_cast<int>(xs_.rows()); }
  const KernelSpec& spec() const { return spec_; }
  // May exceed the constructor value if jitter was needed to factorize.
  double lambda() const { return lambda_; }
  const Eigen::MatrixXd& points() const { return xs_; }
  bool has_values() const { return ys_.has_value(); }
  const Eigen::VectorXd& values() const { return *ys_; }
  const Eigen::MatrixXd& chol() const { return chol_; }

  double posterior_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Clamped at 0 from below; posterior_var_raw keeps the floating-point value.
  double posterior_var(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double posterior_var_raw(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  GpState extend(const Eigen::Ref<const Eigen::VectorXd>& x,
                 std::optional<double> y = std::nullopt) const;

  // L^{-1} k_t(x); shared building block for variance queries and the
  // incremental candidate bookkeeping in the sampler.
  Eigen::VectorXd whitened_cross(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  void factorize();

  KernelSpec spec_;
  double lambda_;
  Eigen::MatrixXd xs_;                 // dim x t, one column per point
  std::optional<Eigen::VectorXd> ys_;  // absent when only variances are needed
  Eigen::MatrixXd chol_;               // lower-triangular L with L L^T = K + lambda I
  Eigen::VectorXd alpha_;              // (K + lambda I)^{-1} y, empty without ys
};

double log_marginal_likelihood(const KernelSpec& spec, double lambda,
                               const Eigen::Ref<const Eigen::MatrixXd>& xs,
                               const Eigen::Ref<const Eigen::VectorXd>& ys);

struct FitBounds {
  double lengthscale_lo = 1e-2;
  double lengthscale_hi = 10.0;
  double scale_lo = 1e-4;
  double scale_hi = 100.0;
};

// Maximum-likelihood (lengthscale, scale) with nu held fixed: 16x16 log-grid
// search followed by Nelder-Mead refinement in log space.
KernelSpec fit_hyperparams(const Eigen::Ref<const Eigen::MatrixXd>& xs,
                           const Eigen::Ref<const Eigen::VectorXd>& ys,
                           double nu_fixed, double lambda, const FitBounds& bounds);

// Confidence band of half-width (B + beta(delta)) sigma_t(x) around the
// posterior mean, with beta(delta) = (R / lambda) sqrt(2 log(1/delta)).
struct ConfidenceBand {
  double norm_bound;   // B
  double noise_param;  // R (sub-Gaussian parameter, = sigma here)
  double delta;
  double beta;

  ConfidenceBand(double B, double R, double lambda, double delta_in);
};

std::pair<double, double> confidence_bounds(const GpState& state, const ConfidenceBand& band,
                                            const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace bq

#endif  // BQ_GP_HPP
