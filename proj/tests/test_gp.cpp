#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "bq/gp.hpp"
#include "bq/rng.hpp"

namespace {

Eigen::VectorXd pt1(double x) { return Eigen::VectorXd::Constant(1, x); }

const bq::KernelSpec kSpec{1.5, 0.25, 2.0};

bq::GpState state_from(const std::vector<double>& xs, const std::vector<double>& ys,
                       double lambda, const bq::KernelSpec& spec = kSpec) {
  Eigen::MatrixXd x(1, xs.size());
  Eigen::VectorXd y(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x(0, i) = xs[i];
    y[i] = ys[i];
  }
  return bq::GpState(spec, lambda, x, y);
}

}  // namespace

TEST_CASE("posterior mean basics") {
  bq::GpState empty(kSpec, 0.1);
  CHECK(empty.posterior_mean(pt1(0.4)) == 0.0);

  // 1x1 system by hand: mu(x1) = y k / (k + lambda)
  const double lambda = 0.3, y1 = 1.7;
  const auto one = state_from({0.6}, {y1}, lambda);
  CHECK(one.posterior_mean(pt1(0.6)) ==
        doctest::Approx(y1 * kSpec.scale / (kSpec.scale + lambda)).epsilon(1e-12));

  // symmetric points with equal values give a mean symmetric about the midpoint
  const auto two = state_from({0.3, 0.7}, {1.1, 1.1}, 0.05);
  for (double d : {0.05, 0.1, 0.18})
    CHECK(two.posterior_mean(pt1(0.5 - d)) ==
          doctest::Approx(two.posterior_mean(pt1(0.5 + d))).epsilon(1e-12));
}

TEST_CASE("posterior variance basics") {
  bq::GpState empty(kSpec, 0.1);
  CHECK(empty.posterior_var(pt1(0.2)) == doctest::Approx(kSpec.scale));

  const auto tight = state_from({0.5}, {0.0}, 1e-12);
  CHECK(tight.posterior_var(pt1(0.5)) <= 1e-6);

  const double lambda = 0.09;
  const auto one = state_from({0.5}, {0.3}, lambda);
  CHECK(one.posterior_var(pt1(0.5)) ==
        doctest::Approx(kSpec.scale * lambda / (kSpec.scale + lambda)).epsilon(1e-10));
  CHECK(one.posterior_var(pt1(0.5)) >= 0.0);
}

TEST_CASE("extend matches from-scratch rebuilds") {
  bq::Rng rng(31);
  bq::GpState inc(kSpec, 0.02);
  Eigen::MatrixXd xs(2, 50);
  Eigen::VectorXd ys(50);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd x(2);
    x << rng.uniform01(), rng.uniform01();
    const double y = std::sin(4.0 * x[0]) + rng.gauss(0.0, 0.1);
    xs.col(t) = x;
    ys[t] = y;
    inc = inc.extend(x, y);
  }
  const bq::GpState scratch(kSpec, 0.02, xs, ys);
  for (int q = 0; q < 20; ++q) {
    Eigen::VectorXd x(2);
    x << rng.uniform01(), rng.uniform01();
    CHECK(inc.posterior_mean(x) == doctest::Approx(scratch.posterior_mean(x)).epsilon(1e-8));
    CHECK(inc.posterior_var(x) == doctest::Approx(scratch.posterior_var(x)).epsilon(1e-8));
  }
}

TEST_CASE("extend drops the variance at the new point") {
  bq::Rng rng(5);
  bq::GpState state(kSpec, 0.05);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd x = pt1(rng.uniform01());
    const double before = state.posterior_var(x);
    state = state.extend(x, rng.gauss());
    const double after = state.posterior_var(x);
    CHECK(after <= before + 1e-12);
    CHECK(after < before);  // lambda floor not reached at these sizes
  }
}

TEST_CASE("extend from empty matches the 1x1 formula") {
  bq::GpState state(kSpec, 0.4);
  state = state.extend(pt1(0.3), 2.0);
  CHECK(state.posterior_mean(pt1(0.3)) ==
        doctest::Approx(2.0 * kSpec.scale / (kSpec.scale + 0.4)).epsilon(1e-12));
}

TEST_CASE("duplicate points stay invertible") {
  bq::GpState state(kSpec, 0.01);
  state = state.extend(pt1(0.5), 1.0);
  state = state.extend(pt1(0.5), 1.2);
  state = state.extend(pt1(0.5), 0.8);
  CHECK(state.size() == 3);
  CHECK(std::isfinite(state.posterior_mean(pt1(0.5))));
  CHECK(state.posterior_var(pt1(0.5)) >= 0.0);
  // chol * chol^T reproduces K + lambda I
  Eigen::MatrixXd a = bq::kernel_matrix(kSpec, state.points());
  a.diagonal().array() += state.lambda();
  const Eigen::MatrixXd rebuilt = state.chol() * state.chol().transpose();
  CHECK((rebuilt - a).cwiseAbs().maxCoeff() <= 1e-8 * a.norm());
}

TEST_CASE("extend rejects bad input") {
  bq::GpState state(kSpec, 0.1);
  state = state.extend(pt1(0.1), 0.5);
  CHECK_THROWS_AS(state.extend(pt1(std::nan("")), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(state.extend(pt1(0.2), std::nan("")), std::invalid_argument);
  Eigen::VectorXd wrong(2);
  wrong << 0.1, 0.2;
  CHECK_THROWS_AS(state.extend(wrong, 1.0), std::invalid_argument);
}

TEST_CASE("variance monotone in t on a fixed grid") {
  bq::Rng rng(77);
  bq::GpState state(kSpec, 0.03);
  std::vector<Eigen::VectorXd> grid;
  for (int i = 0; i < 15; ++i) grid.push_back(pt1(i / 14.0));
  std::vector<double> prev(grid.size(), kSpec.scale);
  for (int t = 0; t < 25; ++t) {
    state = state.extend(pt1(rng.uniform01()), rng.gauss());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = state.posterior_var(grid[i]);
      CHECK(v <= prev[i] + 1e-10);
      prev[i] = v;
    }
  }
}

TEST_CASE("variance-only states match valued ones") {
  bq::Rng rng(19);
  bq::GpState with_y(kSpec, 0.05);
  bq::GpState without_y(kSpec, 0.05);
  for (int t = 0; t < 8; ++t) {
    const Eigen::VectorXd x = pt1(rng.uniform01());
    with_y = with_y.extend(x, rng.gauss());
    without_y = without_y.extend(x);
  }
  CHECK_FALSE(without_y.has_values());
  for (double q : {0.1, 0.42, 0.9})
    CHECK(without_y.posterior_var(pt1(q)) ==
          doctest::Approx(with_y.posterior_var(pt1(q))).epsilon(1e-14));
  CHECK_THROWS_AS(without_y.posterior_mean(pt1(0.5)), std::logic_error);
}

TEST_CASE("variance argmax ignores the observations") {
  bq::Rng rng(13);
  Eigen::MatrixXd xs(1, 12);
  Eigen::VectorXd ya(12), yb(12);
  for (int i = 0; i < 12; ++i) {
    xs(0, i) = rng.uniform01();
    ya[i] = rng.gauss();
    yb[i] = rng.gauss() * 10.0 + 3.0;
  }
  const bq::GpState a(kSpec, 0.05, xs, ya);
  const bq::GpState b(kSpec, 0.05, xs, yb);
  int argmax_a = 0, argmax_b = 0;
  double best_a = -1.0, best_b = -1.0;
  for (int i = 0; i < 40; ++i) {
    const Eigen::VectorXd q = pt1(i / 39.0);
    if (a.posterior_var(q) > best_a) {
      best_a = a.posterior_var(q);
      argmax_a = i;
    }
    if (b.posterior_var(q) > best_b) {
      best_b = b.posterior_var(q);
      argmax_b = i;
    }
  }
  CHECK(argmax_a == argmax_b);
}

TEST_CASE("log marginal likelihood") {
  // scalar case with y = 0
  Eigen::MatrixXd x1(1, 1);
  x1 << 0.5;
  Eigen::VectorXd y0(1);
  y0 << 0.0;
  const double lambda = 0.2;
  CHECK(bq::log_marginal_likelihood(kSpec, lambda, x1, y0) ==
        doctest::Approx(-0.5 * std::log(kSpec.scale + lambda) - 0.5 * std::log(2.0 * M_PI))
            .epsilon(1e-12));

  // invariant under joint permutation
  bq::Rng rng(3);
  Eigen::MatrixXd xs(1, 6);
  Eigen::VectorXd ys(6);
  for (int i = 0; i < 6; ++i) {
    xs(0, i) = rng.uniform01();
    ys[i] = rng.gauss();
  }
  Eigen::MatrixXd xp(1, 6);
  Eigen::VectorXd yp(6);
  const int perm[6] = {3, 0, 5, 1, 4, 2};
  for (int i = 0; i < 6; ++i) {
    xp.col(i) = xs.col(perm[i]);
    yp[i] = ys[perm[i]];
  }
  CHECK(bq::log_marginal_likelihood(kSpec, 0.1, xs, ys) ==
        doctest::Approx(bq::log_marginal_likelihood(kSpec, 0.1, xp, yp)).epsilon(1e-12));

  // the likelihood surface is smooth in the scale: forward and central
  // difference quotients agree
  auto lml_at_scale = [&](double scale) {
    bq::KernelSpec s = kSpec;
    s.scale = scale;
    return bq::log_marginal_likelihood(s, 0.1, xs, ys);
  };
  const double h = 1e-5, s0 = kSpec.scale;
  const double forward = (lml_at_scale(s0 + h) - lml_at_scale(s0)) / h;
  const double central = (lml_at_scale(s0 + h) - lml_at_scale(s0 - h)) / (2.0 * h);
  CHECK(forward == doctest::Approx(central).epsilon(1e-4));
}

TEST_CASE("hyperparameter fit recovers a known lengthscale") {
  // self-consistency: draw y ~ N(0, K_truth) on 50 clean samples
  const bq::KernelSpec truth{1.5, 0.1, 1.5};
  bq::Rng rng(101);
  Eigen::MatrixXd xs(1, 50);
  for (int i = 0; i < 50; ++i) xs(0, i) = rng.uniform01();
  Eigen::MatrixXd k = bq::kernel_matrix(truth, xs);
  k.diagonal().array() += 1e-10;
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(k).matrixL();
  Eigen::VectorXd z(50);
  for (int i = 0; i < 50; ++i) z[i] = rng.gauss();
  const Eigen::VectorXd ys = l * z;

  bq::FitBounds bounds;
  bounds.lengthscale_lo = 0.02;
  bounds.lengthscale_hi = 2.0;
  bounds.scale_lo = 0.05;
  bounds.scale_hi = 20.0;
  const bq::KernelSpec fit = bq::fit_hyperparams(xs, ys, 1.5, 1e-4, bounds);
  CHECK(std::abs(std::log(fit.lengthscale) - std::log(truth.lengthscale)) <= 0.5);
}

TEST_CASE("hyperparameter fit edge cases") {
  bq::Rng rng(4);
  Eigen::MatrixXd xs(1, 8);
  for (int i = 0; i < 8; ++i) xs(0, i) = rng.uniform01();

  // all-zero values drive the scale to its lower bound
  bq::FitBounds bounds;
  bounds.scale_lo = 1e-3;
  bounds.scale_hi = 10.0;
  const bq::KernelSpec flat = bq::fit_hyperparams(xs, Eigen::VectorXd::Zero(8), 1.5, 0.1, bounds);
  CHECK(flat.scale == doctest::Approx(bounds.scale_lo).epsilon(1e-6));

  // collapsed bounds return the single candidate
  bq::FitBounds point;
  point.lengthscale_lo = point.lengthscale_hi = 0.33;
  point.scale_lo = point.scale_hi = 1.2;
  Eigen::VectorXd ys(8);
  for (int i = 0; i < 8; ++i) ys[i] = rng.gauss();
  const bq::KernelSpec fixed = bq::fit_hyperparams(xs, ys, 1.5, 0.1, point);
  CHECK(fixed.lengthscale == doctest::Approx(0.33));
  CHECK(fixed.scale == doctest::Approx(1.2));

  CHECK_THROWS_AS(bq::fit_hyperparams(xs.leftCols(2), ys.head(2), 1.5, 0.1, bounds),
                  std::invalid_argument);
}

TEST_CASE("confidence bounds") {
  const double B = 1.5, sigma = 0.2, lambda = sigma * sigma;

  // delta = 1: beta = 0, width 2 B sigma_t
  const bq::ConfidenceBand certain(B, sigma, lambda, 1.0);
  CHECK(certain.beta == doctest::Approx(0.0));
  bq::GpState empty(kSpec, lambda);
  auto [lo, hi] = bq::confidence_bounds(empty, certain, pt1(0.5));
  CHECK(hi - lo == doctest::Approx(2.0 * B * std::sqrt(kSpec.scale)).epsilon(1e-12));
  CHECK(lo == doctest::Approx(-B * std::sqrt(kSpec.scale)).epsilon(1e-12));

  const bq::ConfidenceBand band(B, sigma, lambda, 0.1);
  CHECK(band.beta == doctest::Approx((sigma / lambda) * std::sqrt(2.0 * std::log(10.0))));
  auto [l2, u2] = bq::confidence_bounds(empty, band, pt1(0.1));
  CHECK(u2 - l2 >= 0.0);
}

TEST_CASE("confidence coverage over noise redraws") {
  // fixed kernel expansion f with known norm, fixed design, fixed query
  const bq::KernelSpec spec{1.5, 0.3, 1.0};
  bq::Rng rng(2718);
  Eigen::MatrixXd centers(1, 8);
  Eigen::VectorXd coeffs(8);
  for (int i = 0; i < 8; ++i) {
    centers(0, i) = rng.uniform01();
    coeffs[i] = rng.uniform(-1.0, 1.0);
  }
  auto f = [&](double t) { return bq::kernel_cross(spec, centers, pt1(t)).dot(coeffs); };
  const Eigen::MatrixXd kcc = bq::kernel_matrix(spec, centers);
  const double norm = std::sqrt(coeffs.dot(kcc * coeffs));

  const double sigma = 0.3, lambda = sigma * sigma, delta = 0.1;
  const bq::ConfidenceBand band(norm, sigma, lambda, delta);
  Eigen::MatrixXd xs(1, 15);
  for (int i = 0; i < 15; ++i) xs(0, i) = (i + 0.5) / 15.0;
  const Eigen::VectorXd q = pt1(0.37);
  const double fq = f(0.37);

  int violations = 0;
  const int redraws = 200;
  for (int rep = 0; rep < redraws; ++rep) {
    Eigen::VectorXd ys(15);
    for (int i = 0; i < 15; ++i) ys[i] = f(xs(0, i)) + rng.gauss(0.0, sigma);
    const bq::GpState state(spec, lambda, xs, ys);
    auto [lo, hi] = bq::confidence_bounds(state, band, q);
    if (fq < lo || fq > hi) ++violations;
  }
  const double rate = static_cast<double>(violations) / redraws;
  CHECK(rate <= delta + 3.0 * std::sqrt(delta * (1.0 - delta) / redraws));
}
