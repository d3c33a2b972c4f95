#ifndef BQ_ORACLE_HPP
#define BQ_ORACLE_HPP

#include <Eigen/Dense>

#include <functional>

#include "bq/integrands.hpp"

namespace bq {

// Reference integrator for deterministic integrands. Kept independent of the
// estimation strategies: plain adaptive/tensor/QMC quadrature only.
enum class OracleMethod { kAuto, kAdaptive1d, kTensorGauss, kQmc };

struct OracleConfig {
  OracleMethod method = OracleMethod::kAuto;
  double abs_tol = 1e-9;
  long points_budget = 1000000;

  void validate(int dim) const;  // throws std::invalid_argument
};

struct OracleResult {
  double value = 0.0;
  double err_estimate = 0.0;
  // false when the tolerance was not reached within budget; never a throw.
  bool converged = true;
};

using ScalarFn1d = std::function<double(double)>;
using ScalarField = std::function<double(const Eigen::VectorXd&)>;

// Gauss-Legendre nodes and weights on [-1,1], generated by Newton iteration.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n);

// Adaptive bisection with a nested GL7/GL15 rule pair; the interval starts
// pre-split so narrow features are not skipped over.
OracleResult integrate_adaptive_1d(const ScalarFn1d& f, double a, double b, double abs_tol,
                                   long max_evals = 2000000, int presplit = 16);

// Weighted integral of f over an axis-aligned box, method chosen per the
// config (auto: adaptive for d=1, tensor Gauss-Legendre 32/48 for d<=3,
// scrambled Sobol QMC with 8 randomizations otherwise).
OracleResult integrate_box(const ScalarField& f, int dim, const OracleConfig& cfg,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

// integral of f(x) p(x) over [0,1]^dim
OracleResult integrate(const Integrand& f, const WeightDensity& weight, const OracleConfig& cfg);

}  // namespace bq

#endif  // BQ_ORACLE_HPP
