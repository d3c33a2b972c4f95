#include "bq/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace bq {

namespace {

constexpr double kEulerGamma = 0.5772156649015328606;
constexpr double kSeriesEps = 1e-16;
constexpr int kMaxIter = 20000;

// gam1 = [1/Gamma(1-mu) - 1/Gamma(1+mu)] / (2 mu), gam2 = their average.
void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
  gampl = 1.0 / std::tgamma(1.0 + mu);
  gammi = 1.0 / std::tgamma(1.0 - mu);
  gam1 = std::abs(mu) < 1e-8 ? -kEulerGamma : (gammi - gampl) / (2.0 * mu);
  gam2 = 0.5 * (gammi + gampl);
}

// K_mu and K_{mu+1} for |mu| <= 1/2, x <= 2 (Temme's series).
void bessel_k_temme(double mu, double x, double& kmu, double& kmu1) {
  const double x2 = 0.5 * x;
  const double pimu = M_PI * mu;
  const double fact = std::abs(pimu) < 1e-12 ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(x2);
  double e = mu * d;
  const double fact2 = std::abs(e) < 1e-12 ? 1.0 : std::sinh(e) / e;
  double gam1, gam2, gampl, gammi;
  temme_gammas(mu, gam1, gam2, gampl, gammi);
  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / gampl;
  double q = 0.5 / (e * gammi);
  double c = 1.0;
  d = x2 * x2;
  double sum1 = p;
  const double mu2 = mu * mu;
  for (int i = 1; i <= kMaxIter; ++i) {
    ff = (i * ff + p + q) / (i * i - mu2);
    c *= d / i;
    p /= (i - mu);
    q /= (i + mu);
    const double del = c * ff;
    sum += del;
    sum1 += c * (p - i * ff);
    if (std::abs(del) < std::abs(sum) * kSeriesEps) break;
  }
  kmu = sum;
  kmu1 = sum1 * (2.0 / x);
}

// K_mu and K_{mu+1} for |mu| <= 1/2, x > 2 (Steed's CF2 evaluation of the
// large-argument expansion).
void bessel_k_cf2(double mu, double x, double& kmu, double& kmu1) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIter; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kSeriesEps) break;
  }
  h = a1 * h;
  kmu = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x) / s;
  kmu1 = kmu * (mu + x + 0.5 - h) / x;
}

}  // namespace

double bessel_k(double nu, double x) {
  if (!(x > 0.0) || nu < 0.0) throw std::invalid_argument("bessel_k: need x > 0 and nu >= 0");
  const int nl = static_cast<int>(std::floor(nu + 0.5));
  const double mu = nu - nl;  // in [-1/2, 1/2]
  double kmu, kmu1;
  if (x <= 2.0)
    bessel_k_temme(mu, x, kmu, kmu1);
  else
    bessel_k_cf2(mu, x, kmu, kmu1);
  const double xi2 = 2.0 / x;
  for (int i = 1; i <= nl; ++i) {
    const double knext = (mu + i) * xi2 * kmu1 + kmu;
    kmu = kmu1;
    kmu1 = knext;
  }
  return kmu;
}

double matern_correlation(double nu, double u) {
  if (u <= 0.0) return 1.0;
  const double eu = std::exp(-u);
  if (std::abs(nu - 0.5) < 1e-12) return eu;
  if (std::abs(nu - 1.5) < 1e-12) return (1.0 + u) * eu;
  if (std::abs(nu - 2.5) < 1e-12) return (1.0 + u + u * u / 3.0) * eu;
  return matern_correlation_bessel(nu, u);
}

double matern_correlation_bessel(double nu, double u) {
  if (u < 1e-10) return 1.0;
  const double c = std::pow(2.0, 1.0 - nu) / std::tgamma(nu);
  const double v = c * std::pow(u, nu) * bessel_k(nu, u);
  // guard the r -> 0 limit against rounding above 1
  return v < 1.0 ? v : 1.0;
}

void KernelSpec::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("KernelSpec: nu must be > 0");
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
    throw std::invalid_argument("KernelSpec: lengthscale must be > 0");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("KernelSpec: scale must be > 0");
}

SmoothnessInfo smoothness_info(const KernelSpec& spec, int dim) {
  if (dim < 1) throw std::invalid_argument("smoothness_info: dim must be >= 1");
  SmoothnessInfo info;
  info.dim = dim;
  info.s = spec.nu + 0.5 * dim;
  info.s_is_integer = std::abs(info.s - std::round(info.s)) < 1e-12;
  return info;
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2) {
  if (x.size() != x2.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
  if (!x.allFinite() || !x2.allFinite())
    throw std::invalid_argument("kernel_eval: non-finite coordinates");
  const double r = (x - x2).norm();
  const double u = std::sqrt(2.0 * spec.nu) * r / spec.lengthscale;
  return spec.scale * matern_correlation(spec.nu, u);
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec,
                              const Eigen::Ref<const Eigen::MatrixXd>& points) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = spec.scale;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      k(i, j) = kernel_eval(spec, points.col(i), points.col(j));
      k(j, i) = k(i, j);
    }
  }
  return k;
}

Eigen::VectorXd kernel_cross(const KernelSpec& spec,
                             const Eigen::Ref<const Eigen::MatrixXd>& points,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = points.cols();
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = kernel_eval(spec, points.col(i), x);
  return v;
}

}  // namespace bq
