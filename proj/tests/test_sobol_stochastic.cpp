#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "statrom/sobol.hpp"
#include "statrom/stochastic.hpp"

using namespace statrom;

// Sequence values below are binary fractions reproduced exactly; they were
// frozen from an independent generator built on the same Joe-Kuo table.

TEST_CASE("unshifted sobol dim 1 starts 0, 1/2, 3/4, 1/4") {
  const Matrix p = sobol_uniform(1, 4);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(1, 0) == 0.5);
  CHECK(p(2, 0) == 0.75);
  CHECK(p(3, 0) == 0.25);
}

TEST_CASE("unshifted sobol dim 5 leading block") {
  const Matrix p = sobol_uniform(5, 16);
  const double expect[9][5] = {
      {0.0, 0.0, 0.0, 0.0, 0.0},
      {0.5, 0.5, 0.5, 0.5, 0.5},
      {0.75, 0.25, 0.25, 0.25, 0.75},
      {0.25, 0.75, 0.75, 0.75, 0.25},
      {0.375, 0.375, 0.625, 0.875, 0.375},
      {0.875, 0.875, 0.125, 0.375, 0.875},
      {0.625, 0.125, 0.875, 0.625, 0.625},
      {0.125, 0.625, 0.375, 0.125, 0.125},
      {0.0625, 0.9375, 0.5625, 0.3125, 0.6875},  // row 15
  };
  const int rows[9] = {0, 1, 2, 3, 4, 5, 6, 7, 15};
  for (int r = 0; r < 9; ++r)
    for (int d = 0; d < 5; ++d) CHECK(p(rows[r], d) == expect[r][d]);
}

TEST_CASE("unshifted sobol spot values in high dimensions") {
  REQUIRE(sobol_table_dims() >= 2048);
  const Matrix p = sobol_uniform(2048, 8);
  CHECK(p(3, 2047) == 0.25);
  CHECK(p(5, 1234) == 0.625);
  CHECK(p(7, 100) == 0.375);

  const Matrix q = sobol_uniform(3, 1024);
  CHECK(q(1000, 0) == 0.2197265625);
  CHECK(q(1000, 1) == 0.0966796875);
  CHECK(q(1000, 2) == 0.5185546875);
}

TEST_CASE("sobol dimension past the direction table is an error") {
  CHECK_THROWS_AS(sobol_uniform(sobol_table_dims() + 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(sobol_uniform(0, 2), std::invalid_argument);
}

TEST_CASE("digital shift is deterministic per seed and stays in [0,1)") {
  const Matrix a = sobol_uniform(4, 64, 7u);
  const Matrix b = sobol_uniform(4, 64, 7u);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Matrix c = sobol_uniform(4, 64, 8u);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(a.maxCoeff() < 1.0);
  // shifted sequence must not contain the origin point
  CHECK(a.row(0).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("normal quantile against frozen oracle values") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.3) == doctest::Approx(-0.52440051270804089).epsilon(1e-12));
  CHECK(normal_quantile(0.9999) == doctest::Approx(3.7190164854557088).epsilon(1e-12));
  // tails are clamped at 1e-12 so the origin point stays finite
  CHECK(normal_quantile(1e-12) == doctest::Approx(-7.0344838253011313).epsilon(1e-12));
  CHECK(normal_quantile(0.0) == doctest::Approx(-7.0344838253011313).epsilon(1e-12));
  // 1.0 - 1e-12 rounds in double, so the upper clamp is not the exact mirror
  CHECK(normal_quantile(1.0) == doctest::Approx(7.0344869100478356).epsilon(1e-12));
  for (double p : {0.31, 0.42, 0.77, 0.93})
    CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
}

TEST_CASE("sobol_gaussian is reproducible and roughly centered") {
  const Matrix z1 = sobol_gaussian(6, 1024, 3u);
  const Matrix z2 = sobol_gaussian(6, 1024, 3u);
  CHECK((z1 - z2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(z1.rows() == 1024);
  CHECK(z1.cols() == 6);
  for (int d = 0; d < 6; ++d) {
    CHECK(std::abs(z1.col(d).mean()) <= 0.05);
    const double var = z1.col(d).squaredNorm() / 1024.0;
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("matern kernel closed forms and Bessel branch") {
  auto val = [](double nu, double sigma, double ell, double r) {
    return matern_value({nu, sigma, ell}, r);
  };
  CHECK(val(1.5, 1.0, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(val(0.5, 1.0, 1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(val(0.5, 1.0, 1.0, 0.7) == doctest::Approx(0.49658530379140964).epsilon(1e-10));
  CHECK(val(1.5, 0.8, 0.6, 0.25) == doctest::Approx(0.53543818540893307).epsilon(1e-10));
  CHECK(val(1.5, 0.8, 0.6, 0.6) == doctest::Approx(0.30934894374176514).epsilon(1e-10));
  CHECK(val(1.5, 1.0, 0.3, 0.45) == doctest::Approx(0.26775660686440939).epsilon(1e-10));
  CHECK(val(2.5, 1.3, 0.9, 1.1) == doctest::Approx(0.68383259625273274).epsilon(1e-10));
  CHECK(val(2.5, 1.0, 1.0, 0.05) == doctest::Approx(0.99792280210078832).epsilon(1e-10));
  // non-half-integer smoothness goes through the Bessel evaluation
  CHECK(val(0.7, 1.1, 0.5, 0.3) == doctest::Approx(0.73794664559694079).epsilon(1e-9));
  CHECK_THROWS_AS(val(1.5, 1.0, 1.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(val(0.0, 1.0, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("matern approaches the squared exponential for large nu") {
  const MaternKernel high{50.0, 1.0, 1.0};
  const MaternKernel sq{200.0, 1.0, 1.0};  // evaluated as the limit kernel
  for (double r : {0.1, 0.5, 1.0, 1.5}) {
    const double limit = std::exp(-0.5 * r * r);
    CHECK(matern_value(high, r) == doctest::Approx(limit).epsilon(0.02));
    CHECK(matern_value(sq, r) == doctest::Approx(limit).epsilon(1e-12));
  }
  CHECK(matern_value(sq, 0.5) == doctest::Approx(0.88249690258459534).epsilon(1e-12));
}

TEST_CASE("matern is monotone non-increasing in distance") {
  for (double nu : {0.5, 1.5, 2.5, 0.8}) {
    const MaternKernel k{nu, 1.3, 0.4};
    double prev = matern_value(k, 0.0);
    for (int i = 1; i <= 60; ++i) {
      const double cur = matern_value(k, 0.05 * i);
      CHECK(cur <= prev + 1e-14);
      prev = cur;
    }
  }
}

TEST_CASE("kernel matrix basics") {
  const MaternKernel k{0.5, 2.0, 1.0};
  Matrix one(1, 1);
  one << 0.3;
  const Matrix K1 = kernel_matrix(k, one);
  CHECK(K1(0, 0) == doctest::Approx(4.0));

  Matrix dup(2, 1);
  dup << 0.3, 0.3;
  const Matrix K2 = kernel_matrix(k, dup);
  CHECK(K2(0, 1) == doctest::Approx(4.0));
  CHECK(K2(1, 0) == K2(0, 1));

  Matrix three(3, 1);
  three << 0.0, 1.0, 2.0;  // spacing = ell
  const MaternKernel e{0.5, 1.0, 1.0};
  const Matrix K3 = kernel_matrix(e, three);
  CHECK(K3(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(K3(0, 2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK((K3 - K3.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel matrix plus jitter admits a Cholesky factorization") {
  Matrix pts(40, 2);
  for (int i = 0; i < 40; ++i) {
    pts(i, 0) = std::fmod(0.37 * i, 1.0);
    pts(i, 1) = std::fmod(0.71 * i, 1.0);
  }
  const MaternKernel k{2.5, 0.8, 0.3};
  Matrix K = kernel_matrix(k, pts);
  K.diagonal().array() += 1e-10 * k.sigma * k.sigma;
  Eigen::LLT<Matrix> llt(K);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("cross kernel matrix matches pairwise evaluation") {
  Matrix a(2, 2), b(3, 2);
  a << 0.0, 0.0, 1.0, 0.5;
  b << 0.2, 0.1, 0.9, 0.9, 0.5, 0.5;
  const MaternKernel k{1.5, 1.1, 0.7};
  const Matrix K = kernel_matrix(k, a, b);
  REQUIRE(K.rows() == 2);
  REQUIRE(K.cols() == 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(K(i, j) == doctest::Approx(matern_value(k, (a.row(i) - b.row(j)).norm())));
}

TEST_CASE("discrete forcing covariance is the weighted kernel sandwich") {
  Matrix pts(4, 1);
  pts << 0.0, 0.25, 0.5, 0.75;
  Vector w(4);
  w << 0.125, 0.25, 0.25, 0.125;
  const ComplexVector mean_field = ComplexVector::Constant(4, Complex(2.0, -1.0));
  const MaternKernel k{0.5, 0.3, 0.2};
  const Gaussian g = discrete_forcing(pts, w, mean_field, k, true);
  CHECK(g.complex_field);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(g.mean(i) - w(i) * mean_field(i)) <= 1e-15);
    for (int j = 0; j < 4; ++j) {
      const double want = w(i) * matern_value(k, std::abs(pts(i) - pts(j))) * w(j);
      CHECK(g.cov(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("point-supported forcing keeps a single covariance entry") {
  // 1d boundary flux: the only nonzero weight sits on node 0
  Matrix pts(3, 1);
  pts << 0.0, 0.5, 1.0;
  Vector w = Vector::Zero(3);
  w(0) = 1.0;
  const MaternKernel k{0.5, 0.02, 1.0};
  const Gaussian g = discrete_forcing(pts, w, ComplexVector::Ones(3), k, false);
  CHECK(g.cov(0, 0) == doctest::Approx(4e-4));
  CHECK(g.cov.cwiseAbs().sum() == doctest::Approx(g.cov(0, 0)));

  const MaternKernel zero{0.5, 0.0, 1.0};
  const Gaussian gz = discrete_forcing(pts, w, ComplexVector::Ones(3), zero, false);
  CHECK(gz.cov.cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(gz.mean(0) - Complex(1.0, 0.0)) <= 1e-15);
}

TEST_CASE("kl expansion keeps all modes at tau = 1") {
  Matrix pts(40, 1);
  for (int i = 0; i < 40; ++i) pts(i, 0) = i / 39.0;
  const MaternKernel k{0.5, 0.5, 0.3};
  const KLExpansion kl = kl_expansion(pts, Vector::Zero(40), k, 1.0);
  CHECK(kl.m() == 40);
  // reconstruction of the full Gram matrix
  const Matrix K = kernel_matrix(k, pts);
  const Matrix recon = kl.modes * kl.lambda.asDiagonal() * kl.modes.transpose();
  CHECK((recon - K).norm() <= 1e-8 * K.norm());
  for (int i = 1; i < kl.m(); ++i) CHECK(kl.lambda(i) <= kl.lambda(i - 1) + 1e-14);
  CHECK(kl.lambda.minCoeff() >= 0.0);
}

TEST_CASE("near-diagonal kernel retains ceil(tau n) modes") {
  Matrix pts(20, 1);
  for (int i = 0; i < 20; ++i) pts(i, 0) = static_cast<double>(i);
  const MaternKernel k{0.5, 1.0, 1e-6};  // lengthscale far below the spacing
  const KLExpansion kl = kl_expansion(pts, Vector::Zero(20), k, 0.95);
  CHECK(kl.m() == 19);
}

TEST_CASE("pinned mode count for the interval material field") {
  // 101 nodes on [0,1], exponential kernel, sigma^2 = 5e-2, ell = 0.3:
  // 14 modes explain 95% of the trace (regression value)
  Matrix pts(101, 1);
  for (int i = 0; i < 101; ++i) pts(i, 0) = i / 100.0;
  const MaternKernel k{0.5, std::sqrt(5e-2), 0.3};
  const KLExpansion kl = kl_expansion(pts, Vector::Zero(101), k, 0.95);
  CHECK(kl.m() == 14);
}

TEST_CASE("kl realizations") {
  Matrix pts(15, 1);
  for (int i = 0; i < 15; ++i) pts(i, 0) = i / 14.0;
  Vector mu = Vector::LinSpaced(15, -0.2, 0.4);
  const KLExpansion kl = kl_expansion(pts, mu, {0.5, 0.4, 0.25}, 0.99);

  const Vector at_mean = kl_realize(kl, Vector::Zero(kl.m()));
  CHECK((at_mean - mu.array().exp().matrix()).cwiseAbs().maxCoeff() <= 1e-14);

  Vector xi = Vector::Zero(kl.m());
  xi(0) = 1.0;
  const Vector one_mode = kl_realize(kl, xi);
  const Vector want = (mu + std::sqrt(kl.lambda(0)) * kl.modes.col(0)).array().exp();
  CHECK((one_mode - want).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(one_mode.minCoeff() > 0.0);

  // log k - mu lies in the span of the retained modes
  Vector xr(kl.m());
  for (int i = 0; i < kl.m(); ++i) xr(i) = 0.3 * std::sin(1.0 + i);
  const Vector kap = kl_realize(kl, xr);
  const Vector logk = kap.array().log().matrix() - mu;
  const Vector coef = kl.modes.colPivHouseholderQr().solve(logk);
  CHECK((kl.modes * coef - logk).norm() <= 1e-12);

  CHECK_THROWS_AS(kl_realize(kl, Vector::Zero(kl.m() + 1)), std::invalid_argument);
}

TEST_CASE("sample moments") {
  ComplexMatrix same = ComplexMatrix::Constant(5, 3, Complex(1.0, 2.0));
  const Gaussian g0 = sample_moments(same);
  CHECK(g0.cov.cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(g0.mean(1) - Complex(1.0, 2.0)) <= 1e-15);

  ComplexMatrix two(2, 1);
  two << Complex(0.0, 0.0), Complex(2.0, 0.0);
  const Gaussian g1 = sample_moments(two);
  CHECK(std::abs(g1.mean(0) - Complex(1.0, 0.0)) <= 1e-15);
  CHECK(g1.cov(0, 0) == doctest::Approx(2.0));  // unbiased, divisor n-1

  ComplexMatrix s(4, 2);
  s << Complex(0.1, 0.5), Complex(1.0, -0.2), Complex(-0.4, 0.1), Complex(0.3, 0.3),
      Complex(0.7, -0.6), Complex(-0.2, 0.9), Complex(0.2, 0.2), Complex(0.5, -0.5);
  const Gaussian ga = sample_moments(s);
  ComplexMatrix perm(4, 2);
  perm << s.row(2), s.row(0), s.row(3), s.row(1);
  const Gaussian gb = sample_moments(perm);
  CHECK((ga.mean - gb.mean).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((ga.cov - gb.cov).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(ga.complex_field);

  CHECK_THROWS_AS(sample_moments(ComplexMatrix::Zero(1, 3)), std::invalid_argument);
}

TEST_CASE("gaussian sampler reproduces the covariance factor") {
  Matrix pts(6, 1);
  pts << 0.0, 0.2, 0.4, 0.6, 0.8, 1.0;
  Gaussian g;
  g.mean = ComplexVector::Constant(6, Complex(0.5, 0.0));
  g.cov = kernel_matrix({1.5, 0.7, 0.4}, pts);
  g.complex_field = false;

  const GaussianSampler s = make_sampler(g);
  CHECK((s.factor * s.factor.transpose() - g.cov).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(s.input_dim() == s.rank());

  const ComplexVector at_zero = draw(s, Vector::Zero(s.input_dim()));
  CHECK((at_zero - g.mean).cwiseAbs().maxCoeff() == 0.0);

  g.complex_field = true;
  const GaussianSampler sc = make_sampler(g);
  CHECK(sc.input_dim() == 2 * sc.rank());
  Vector z = Vector::Zero(sc.input_dim());
  z(0) = 1.0;                 // first real input
  z(sc.rank()) = 1.0;         // first imaginary input
  const ComplexVector d = draw(sc, z);
  CHECK((d.real() - (g.mean.real() + sc.factor.col(0))).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((d.imag() - sc.factor.col(0)).cwiseAbs().maxCoeff() <= 1e-14);

  CHECK_THROWS_AS(draw(sc, Vector::Zero(1)), std::invalid_argument);
}
