#pragma once

#include <cstdint>

#include "statrom/linalg.hpp"

namespace statrom {

/// Stationary Matern covariance. nu = 1/2 is the exponential kernel,
/// nu -> infinity the squared exponential (used verbatim above nu = 100).
struct MaternKernel {
  double nu = 1.5;
  double sigma = 1.0;
  double ell = 1.0;
};

double matern_value(const MaternKernel& k, double r);

/// Gram matrix of the kernel over a point set (rows of pts are points).
Matrix kernel_matrix(const MaternKernel& k, const Matrix& pts);

/// Cross-covariance between two point sets, size a.rows() x b.rows().
Matrix kernel_matrix(const MaternKernel& k, const Matrix& a, const Matrix& b);

/// Gaussian with a complex mean and one shared real covariance: real and
/// imaginary parts fluctuate independently with the same covariance (the
/// circular convention used throughout). Real-valued fields simply keep a
/// zero imaginary channel and complex_field = false.
struct Gaussian {
  ComplexVector mean;
  Matrix cov;
  bool complex_field = false;
};

/// Spectral square root of a Gaussian's covariance for sampling: keeps the
/// eigenpairs above rank_tol * lambda_max, factor = Psi * sqrt(lambda).
struct GaussianSampler {
  ComplexVector mean;
  Matrix factor;  // n x rank
  bool complex_field = false;
  int rank() const { return static_cast<int>(factor.cols()); }
  /// standard-normal inputs required per draw (doubled for complex fields)
  int input_dim() const { return rank() * (complex_field ? 2 : 1); }
};

GaussianSampler make_sampler(const Gaussian& g, double rank_tol = 1e-12);
ComplexVector draw(const GaussianSampler& s, const Vector& z);

/// Moments of an ensemble (rows are samples): complex sample mean plus the
/// unbiased sample covariance of the real parts (shared-covariance
/// convention; the imaginary parts are assumed to share it).
Gaussian sample_moments(const ComplexMatrix& samples);

/// Karhunen-Loeve expansion of a log-normal coefficient field
/// kappa(x) = exp(mu_log(x) + sum_i sqrt(lambda_i) psi_i(x) xi_i),
/// truncated at the smallest m whose eigenvalues explain fraction tau of the
/// total variance (trace of the Gram matrix).
struct KLExpansion {
  Vector mu_log;
  Vector lambda;  // retained eigenvalues, descending
  Matrix modes;   // n x m
  int m() const { return static_cast<int>(modes.cols()); }
};

KLExpansion kl_expansion(const Matrix& pts, const Vector& mu_log, const MaternKernel& k,
                         double tau);
Vector kl_realize(const KLExpansion& kl, const Vector& xi);

/// Gaussian of a discrete forcing vector f_i = integral(f * phi_i) obtained
/// from a Gaussian field f with the given kernel: mean w .* mean_field and
/// covariance diag(w) K diag(w), where w are the basis-function integrals.
Gaussian discrete_forcing(const Matrix& pts, const Vector& w, const ComplexVector& mean_field,
                          const MaternKernel& k, bool complex_field);

}  // namespace statrom
