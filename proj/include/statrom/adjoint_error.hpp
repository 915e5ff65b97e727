#pragma once

#include "statrom/rom.hpp"
#include "statrom/stochastic.hpp"

namespace statrom {

/// Adjoint machinery for pointwise ROM-error indicators: for an extraction
/// functional p (a nodal interpolation row), the dual solution q = A^-H p
/// turns the residual into the exact error at that point,
/// d = q^H (f - A u_rom). The dual solves themselves run in a reduced
/// adjoint basis built around the same expansion point, reusing the primal
/// factorization.
struct AdjointSet {
  Matrix points;                                        // n_t x dim
  std::vector<Eigen::SparseVector<double>> extractors;  // constrained p per point
  std::vector<RomBasis> bases;                          // adjoint-mode basis per point
};

AdjointSet build_adjoint_set(const HelmholtzSystem& sys, const Mesh& mesh, const Matrix& points,
                             double omega_bar, int m, std::shared_ptr<const LuFactors> lu,
                             Recurrence rec = Recurrence::second_derivative);

/// Dual solution q = V (V^H A^H V)^-1 V^H p in the reduced adjoint basis. A
/// is the full system matrix at the evaluation frequency; when A is shared
/// across samples the dual can be computed once and dotted with many
/// residuals.
ComplexVector reduced_dual_solution(const SparseComplexMatrix& A, const RomBasis& adj_basis,
                                    const Eigen::SparseVector<double>& p);

/// Error indicator with the dual solved in the reduced adjoint basis:
/// q^H (f - A u).
Complex reduced_adjoint_error(const SparseComplexMatrix& A, const RomBasis& adj_basis,
                              const Eigen::SparseVector<double>& p,
                              const ComplexVector& rhs_constrained,
                              const ComplexVector& u_lifted);

/// Same indicator with an exact dual solve; reference/testing path.
Complex direct_adjoint_error(const SparseComplexMatrix& A,
                             const Eigen::SparseVector<double>& p,
                             const ComplexVector& rhs_constrained,
                             const ComplexVector& u_lifted);

/// Gaussian-process regression of the pointwise error indicators onto the
/// whole mesh: Matern nu = 5/2 kernel with wavelength-matched length scale
/// ell = 2 pi c / omega and amplitude sigma = 2 max|d|, training data the
/// indicator means (per-point noise variances, complex sample-variance
/// convention) plus exact zeros at Dirichlet nodes. Both channels of the
/// complex mean share the kernel, hence one covariance.
struct ErrorField {
  ComplexVector mean;    // nodal
  Matrix cov;            // shared channel covariance
  Matrix train_points;
  ComplexVector train_values;
  double sigma2 = 0.0;   // kernel amplitude actually used
};

ErrorField regress_error_field(const Mesh& mesh, const Matrix& points,
                               const ComplexVector& d_mean, const Vector& noise_var,
                               double omega, double c);

/// Closed-form Gaussian of a pointwise indicator under a Gaussian right-hand
/// side f ~ N(mu_f, C_f): mean q^H (V - B) mu_fr and the two-term variance
/// with B = A V A_r^-1 (reduced rhs statistics propagated through the ROM).
/// Provided for analysis; the pipeline estimates errors by sampling instead.
std::pair<Complex, double> closed_form_error(const HelmholtzSystem& sys, double omega,
                                             const RomBasis& basis,
                                             const Eigen::SparseVector<double>& p,
                                             const ComplexVector& mu_f, const Matrix& C_f);

}  // namespace statrom
