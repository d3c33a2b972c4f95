#include "bq/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bq {

namespace {

constexpr int kJitterRetries = 3;

// Cholesky of K + lambda I; on failure lambda is inflated in small steps.
// Returns the factor and the (possibly inflated) lambda actually used.
std::pair<Eigen::MatrixXd, double> chol_with_jitter(const Eigen::MatrixXd& kmat, double lambda,
                                                    double scale) {
  const Eigen::Index n = kmat.rows();
  double lam = lambda;
  for (int attempt = 0; attempt <= kJitterRetries; ++attempt) {
    Eigen::MatrixXd a = kmat;
    a.diagonal().array() += lam;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) return {Eigen::MatrixXd(llt.matrixL()), lam};
    lam += 1e-8 * scale;
  }
  throw std::runtime_error("GpState: Cholesky factorization failed after jitter retries (t=" +
                           std::to_string(n) + ")");
}

}  // namespace

GpState::GpState(KernelSpec spec, double lambda)
    : spec_(std::move(spec)), lambda_(lambda), xs_(0, 0), chol_(0, 0) {
  spec_.validate();
  if (!(lambda_ > 0.0)) throw std::invalid_argument("GpState: lambda must be > 0");
}

GpState::GpState(KernelSpec spec, double lambda, Eigen::MatrixXd xs,
                 std::optional<Eigen::VectorXd> ys)
    : spec_(std::move(spec)), lambda_(lambda), xs_(std::move(xs)), ys_(std::move(ys)) {
  spec_.validate();
  if (!(lambda_ > 0.0)) throw std::invalid_argument("GpState: lambda must be > 0");
  if (ys_ && ys_->size() != xs_.cols())
    throw std::invalid_argument("GpState: xs/ys size mismatch");
  if (!xs_.allFinite() || (ys_ && !ys_->allFinite()))
    throw std::invalid_argument("GpState: non-finite inputs");
  factorize();
}

void GpState::factorize() {
  if (xs_.cols() == 0) {
    chol_.resize(0, 0);
    alpha_.resize(0);
    return;
  }
  auto [l, lam] = chol_with_jitter(kernel_matrix(spec_, xs_), lambda_, spec_.scale);
  chol_ = std::move(l);
  lambda_ = lam;
  if (ys_) {
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(*ys_);
    chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
  }
}

Eigen::VectorXd GpState::whitened_cross(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd v = kernel_cross(spec_, xs_, x);
  chol_.triangularView<Eigen::Lower>().solveInPlace(v);
  return v;
}

double GpState::posterior_mean(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (size() == 0) return 0.0;
  if (!ys_) throw std::logic_error("posterior_mean: state has no observations");
  return kernel_cross(spec_, xs_, x).dot(alpha_);
}

double GpState::posterior_var_raw(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (size() == 0) return spec_.scale;
  return spec_.scale - whitened_cross(x).squaredNorm();
}

double GpState::posterior_var(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return std::max(0.0, posterior_var_raw(x));
}

GpState GpState::extend(const Eigen::Ref<const Eigen::VectorXd>& x,
                        std::optional<double> y) const {
  if (!x.allFinite()) throw std::invalid_argument("extend: non-finite point");
  if (y && !std::isfinite(*y)) throw std::invalid_argument("extend: non-finite value");
  if (size() > 0 && x.size() != dim()) throw std::invalid_argument("extend: dimension mismatch");
  if (size() > 0 && ys_.has_value() != y.has_value())
    throw std::invalid_argument("extend: observation presence must match the state");

  const int t = size();
  GpState out(spec_, lambda_);
  out.xs_.resize(x.size(), t + 1);
  if (t > 0) out.xs_.leftCols(t) = xs_;
  out.xs_.col(t) = x;
  if (y) {
    out.ys_.emplace(t + 1);
    if (t > 0) out.ys_->head(t) = *ys_;
    (*out.ys_)[t] = *y;
  }

  // O(t^2) factor append; falls back to a jittered rebuild when the new
  // diagonal entry is not safely positive (near-duplicate points, tiny lambda).
  const double kxx = spec_.scale + lambda_;
  double diag_sq = kxx;
  Eigen::VectorXd v;
  if (t > 0) {
    v = whitened_cross(x);
    diag_sq = kxx - v.squaredNorm();
  }
  if (diag_sq > 1e-12 * kxx) {
    out.chol_.setZero(t + 1, t + 1);
    if (t > 0) {
      out.chol_.topLeftCorner(t, t) = chol_;
      out.chol_.row(t).head(t) = v.transpose();
    }
    out.chol_(t, t) = std::sqrt(diag_sq);
    if (out.ys_) {
      out.alpha_ = out.chol_.triangularView<Eigen::Lower>().solve(*out.ys_);
      out.chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(out.alpha_);
    }
  } else {
    out.factorize();  // rebuild; chol_with_jitter inflates lambda as needed
  }
  return out;
}

double log_marginal_likelihood(const KernelSpec& spec, double lambda,
                               const Eigen::Ref<const Eigen::MatrixXd>& xs,
                               const Eigen::Ref<const Eigen::VectorXd>& ys) {
  const Eigen::Index t = xs.cols();
  if (t < 1) throw std::invalid_argument("log_marginal_likelihood: need >= 1 observation");
  if (ys.size() != t) throw std::invalid_argument("log_marginal_likelihood: xs/ys mismatch");
  Eigen::MatrixXd a = kernel_matrix(spec, xs);
  a.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_marginal_likelihood: factorization failed");
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::VectorXd w = l.triangularView<Eigen::Lower>().solve(ys);
  return -0.5 * w.squaredNorm() - l.diagonal().array().log().sum() -
         0.5 * t * std::log(2.0 * M_PI);
}

namespace {

// Nelder-Mead on a 2-D box (coordinates already in log space).
Eigen::Vector2d nelder_mead_2d(const std::function<double(const Eigen::Vector2d&)>& f,
                               Eigen::Vector2d x0, const Eigen::Vector2d& lo,
                               const Eigen::Vector2d& hi, int max_iter) {
  auto clamp = [&](Eigen::Vector2d p) {
    return Eigen::Vector2d(std::clamp(p[0], lo[0], hi[0]), std::clamp(p[1], lo[1], hi[1]));
  };
  std::array<Eigen::Vector2d, 3> xs;
  std::array<double, 3> fs;
  xs[0] = clamp(x0);
  for (int i = 0; i < 2; ++i) {
    Eigen::Vector2d p = xs[0];
    const double step = 0.25 * (hi[i] - lo[i] > 0 ? 1.0 : 0.0);
    p[i] += (p[i] + step <= hi[i]) ? step : -step;
    xs[i + 1] = clamp(p);
  }
  for (int i = 0; i < 3; ++i) fs[i] = f(xs[i]);

  auto order = [&] {
    std::array<int, 3> idx = {0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::array<Eigen::Vector2d, 3> x2 = {xs[idx[0]], xs[idx[1]], xs[idx[2]]};
    std::array<double, 3> f2 = {fs[idx[0]], fs[idx[1]], fs[idx[2]]};
    xs = x2;
    fs = f2;
  };

  for (int it = 0; it < max_iter; ++it) {
    order();
    if ((xs[2] - xs[0]).norm() < 1e-8 && std::abs(fs[2] - fs[0]) < 1e-10) break;
    const Eigen::Vector2d centroid = 0.5 * (xs[0] + xs[1]);
    const Eigen::Vector2d xr = clamp(centroid + (centroid - xs[2]));
    const double fr = f(xr);
    if (fr < fs[0]) {
      const Eigen::Vector2d xe = clamp(centroid + 2.0 * (centroid - xs[2]));
      const double fe = f(xe);
      if (fe < fr) {
        xs[2] = xe;
        fs[2] = fe;
      } else {
        xs[2] = xr;
        fs[2] = fr;
      }
    } else if (fr < fs[1]) {
      xs[2] = xr;
      fs[2] = fr;
    } else {
      const Eigen::Vector2d xc = clamp(centroid + 0.5 * (xs[2] - centroid));
      const double fc = f(xc);
      if (fc < fs[2]) {
        xs[2] = xc;
        fs[2] = fc;
      } else {
        xs[1] = clamp(xs[0] + 0.5 * (xs[1] - xs[0]));
        xs[2] = clamp(xs[0] + 0.5 * (xs[2] - xs[0]));
        fs[1] = f(xs[1]);
        fs[2] = f(xs[2]);
      }
    }
  }
  order();
  return xs[0];
}

}  // namespace

KernelSpec fit_hyperparams(const Eigen::Ref<const Eigen::MatrixXd>& xs,
                           const Eigen::Ref<const Eigen::VectorXd>& ys, double nu_fixed,
                           double lambda, const FitBounds& bounds) {
  if (xs.cols() < 3) throw std::invalid_argument("fit_hyperparams: need >= 3 observations");
  if (!(bounds.lengthscale_lo > 0) || bounds.lengthscale_hi < bounds.lengthscale_lo ||
      !(bounds.scale_lo > 0) || bounds.scale_hi < bounds.scale_lo)
    throw std::invalid_argument("fit_hyperparams: invalid bounds");

  const Eigen::Vector2d lo(std::log(bounds.lengthscale_lo), std::log(bounds.scale_lo));
  const Eigen::Vector2d hi(std::log(bounds.lengthscale_hi), std::log(bounds.scale_hi));

  auto objective = [&](const Eigen::Vector2d& p) {
    KernelSpec spec{nu_fixed, std::exp(p[0]), std::exp(p[1])};
    try {
      return -log_marginal_likelihood(spec, lambda, xs, ys);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  constexpr int kGrid = 16;
  Eigen::Vector2d best;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      Eigen::Vector2d p;
      p[0] = kGrid == 1 ? lo[0] : lo[0] + (hi[0] - lo[0]) * i / (kGrid - 1);
      p[1] = kGrid == 1 ? lo[1] : lo[1] + (hi[1] - lo[1]) * j / (kGrid - 1);
      const double v = objective(p);
      if (v < best_val) {
        best_val = v;
        best = p;
      }
    }
  }
  if (!std::isfinite(best_val))
    throw std::runtime_error("fit_hyperparams: no feasible candidate (degenerate data)");

  if ((hi - lo).norm() > 0) {
    const Eigen::Vector2d refined = nelder_mead_2d(objective, best, lo, hi, 200);
    if (objective(refined) < best_val) best = refined;
  }
  return KernelSpec{nu_fixed, std::exp(best[0]), std::exp(best[1])};
}

ConfidenceBand::ConfidenceBand(double B, double R, double lambda, double delta_in)
    : norm_bound(B), noise_param(R), delta(delta_in) {
  if (!(delta > 0.0) || delta > 1.0)
    throw std::invalid_argument("ConfidenceBand: delta must be in (0, 1]");
  if (!(lambda > 0.0)) throw std::invalid_argument("ConfidenceBand: lambda must be > 0");
  beta = (R / lambda) * std::sqrt(2.0 * std::log(1.0 / delta));
}

std::pair<double, double> confidence_bounds(const GpState& state, const ConfidenceBand& band,
                                            const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double mu = state.size() == 0 ? 0.0 : state.posterior_mean(x);
  const double half = (band.norm_bound + band.beta) * std::sqrt(state.posterior_var(x));
  return {mu - half, mu + half};
}

}  // namespace bq
