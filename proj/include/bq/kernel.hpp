#ifndef BQ_KERNEL_HPP
#define BQ_KERNEL_HPP

#include <Eigen/Dense>

namespace bq {

// Matérn kernel parameters. `scale` multiplies the unit-variance Matérn
// correlation, so k(x, x) = scale.
struct KernelSpec {
  double nu = 1.5;
  double lengthscale = 1.0;
  double scale = 1.0;

  void validate() const;  // throws std::invalid_argument on bad parameters
};

// Smoothness bookkeeping: the Matérn-nu RKHS on [0,1]^d is norm-equivalent
// to the Sobolev space of order s = nu + d/2 whenever s is an integer.
struct SmoothnessInfo {
  int dim = 1;
  double s = 0.0;
  bool s_is_integer = false;
};

SmoothnessInfo smoothness_info(const KernelSpec& spec, int dim);

// Modified Bessel function of the second kind K_nu(x), real nu >= 0, x > 0.
// Temme series below x = 2, Steed continued fraction above.
double bessel_k(double nu, double x);

// Matérn correlation as a function of u = sqrt(2 nu) * r / lengthscale.
// Half-integer nu in {1/2, 3/2, 5/2} uses the closed forms; any other nu
// goes through bessel_k.
double matern_correlation(double nu, double u);

// Same quantity, always through the general Bessel-function route.
double matern_correlation_bessel(double nu, double u);

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2);

// Points are columns; the empty input gives a 0x0 matrix.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec,
                              const Eigen::Ref<const Eigen::MatrixXd>& points);

Eigen::VectorXd kernel_cross(const KernelSpec& spec,
                             const Eigen::Ref<const Eigen::MatrixXd>& points,
                             const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace bq

#endif  // BQ_KERNEL_HPP
