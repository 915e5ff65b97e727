#include "statrom/stochastic.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace statrom {

double matern_value(const MaternKernel& k, double r) {
  if (k.nu <= 0 || k.sigma < 0 || k.ell <= 0)
    throw std::invalid_argument("matern_value: need nu > 0, sigma >= 0, ell > 0");
  if (r < 0) throw std::invalid_argument("matern_value: negative distance");
  const double s2 = k.sigma * k.sigma;
  if (r == 0.0) return s2;
  if (k.nu > 100.0) return s2 * std::exp(-0.5 * r * r / (k.ell * k.ell));
  const double z = std::sqrt(2.0 * k.nu) * r / k.ell;
  if (k.nu == 0.5) return s2 * std::exp(-z);
  if (k.nu == 1.5) return s2 * (1.0 + z) * std::exp(-z);
  if (k.nu == 2.5) return s2 * (1.0 + z + z * z / 3.0) * std::exp(-z);
  const double lg = (1.0 - k.nu) * std::log(2.0) - boost::math::lgamma(k.nu) +
                    k.nu * std::log(z);
  return s2 * std::exp(lg) * boost::math::cyl_bessel_k(k.nu, z);
}

Matrix kernel_matrix(const MaternKernel& k, const Matrix& pts) {
  const Eigen::Index n = pts.rows();
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = k.sigma * k.sigma;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = (pts.row(i) - pts.row(j)).norm();
      K(i, j) = K(j, i) = matern_value(k, r);
    }
  }
  return K;
}

Matrix kernel_matrix(const MaternKernel& k, const Matrix& a, const Matrix& b) {
  Matrix K(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      K(i, j) = matern_value(k, (a.row(i) - b.row(j)).norm());
  return K;
}

GaussianSampler make_sampler(const Gaussian& g, double rank_tol) {
  if (g.mean.size() != g.cov.rows())
    throw std::invalid_argument("make_sampler: mean/cov size mismatch");
  GaussianSampler s;
  s.mean = g.mean;
  s.complex_field = g.complex_field;
  if (g.cov.size() == 0 || g.cov.cwiseAbs().maxCoeff() == 0.0) {
    s.factor.resize(g.mean.size(), 0);
    return s;
  }
  EigenPairs ep = sym_eig(g.cov);
  const double lmax = std::max(ep.values(0), 0.0);
  int rank = 0;
  while (rank < ep.values.size() && ep.values(rank) > rank_tol * lmax) ++rank;
  s.factor.resize(g.cov.rows(), rank);
  for (int j = 0; j < rank; ++j) s.factor.col(j) = ep.vectors.col(j) * std::sqrt(ep.values(j));
  return s;
}

ComplexVector draw(const GaussianSampler& s, const Vector& z) {
  if (z.size() != s.input_dim()) throw std::invalid_argument("draw: wrong input dimension");
  ComplexVector out = s.mean;
  const int r = s.rank();
  if (r == 0) return out;
  Vector re = s.factor * z.head(r);
  out.real() += re;
  if (s.complex_field) {
    Vector im = s.factor * z.tail(r);
    out.imag() += im;
  }
  return out;
}

Gaussian sample_moments(const ComplexMatrix& samples) {
  const Eigen::Index n = samples.rows(), N = samples.cols();
  if (n < 2) throw std::invalid_argument("sample_moments: need at least two samples");
  Gaussian g;
  g.mean = samples.colwise().mean().transpose();
  Matrix R = samples.real();
  Eigen::RowVectorXd rmean = R.colwise().mean();
  R.rowwise() -= rmean;
  g.cov = (R.transpose() * R) / static_cast<double>(n - 1);
  g.cov = 0.5 * (g.cov + g.cov.transpose()).eval();
  g.complex_field = samples.imag().cwiseAbs().maxCoeff() > 0.0;
  (void)N;
  return g;
}

KLExpansion kl_expansion(const Matrix& pts, const Vector& mu_log, const MaternKernel& k,
                         double tau) {
  if (pts.rows() != mu_log.size())
    throw std::invalid_argument("kl_expansion: points/mean size mismatch");
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("kl_expansion: tau in (0, 1]");
  Matrix K = kernel_matrix(k, pts);
  EigenPairs ep = sym_eig(K);
  const double total = std::max(ep.values.cwiseMax(0.0).sum(), 1e-300);
  double acc = 0.0;
  int m = 0;
  while (m < ep.values.size() && acc < tau * total && ep.values(m) > 0.0) {
    acc += ep.values(m);
    ++m;
  }
  m = std::max(m, 1);
  KLExpansion kl;
  kl.mu_log = mu_log;
  kl.lambda = ep.values.head(m);
  kl.modes = ep.vectors.leftCols(m);
  return kl;
}

Vector kl_realize(const KLExpansion& kl, const Vector& xi) {
  if (xi.size() != kl.m()) throw std::invalid_argument("kl_realize: xi size mismatch");
  Vector logk = kl.mu_log;
  for (int i = 0; i < kl.m(); ++i) logk += std::sqrt(kl.lambda(i)) * xi(i) * kl.modes.col(i);
  return logk.array().exp();
}

Gaussian discrete_forcing(const Matrix& pts, const Vector& w, const ComplexVector& mean_field,
                          const MaternKernel& k, bool complex_field) {
  if (pts.rows() != w.size() || w.size() != mean_field.size())
    throw std::invalid_argument("discrete_forcing: size mismatch");
  Gaussian g;
  g.mean = w.cast<Complex>().asDiagonal() * mean_field;
  g.cov = w.asDiagonal() * kernel_matrix(k, pts) * w.asDiagonal();
  g.cov = 0.5 * (g.cov + g.cov.transpose()).eval();
  g.complex_field = complex_field;
  return g;
}

}  // namespace statrom
