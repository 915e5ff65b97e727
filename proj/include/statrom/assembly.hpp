#pragma once

#include "statrom/linalg.hpp"
#include "statrom/mesh.hpp"

namespace statrom {

/// Assembled Helmholtz operator pieces for A(w) = S - k^2 M - i k beta D with
/// k = w / c: plain grad-grad stiffness S, mass M weighted by the nodal
/// material field kappa (exact integration for nodal-linear kappa), boundary
/// damping D on impedance faces. The _bc variants have Dirichlet rows and
/// columns zeroed;
/// system_matrix adds the identity on constrained diagonals so the derivative
/// -2w/c^2 M_bc - i beta/c D_bc keeps exact zero rows there.
struct HelmholtzSystem {
  SparseComplexMatrix S, M, D;           // unconstrained
  SparseComplexMatrix S_bc, M_bc, D_bc;  // Dirichlet rows/cols zeroed
  std::vector<int> dirichlet;            // sorted constrained node ids
  double c = 343.0;
  double beta = 0.0;
  Eigen::Index n() const { return S.rows(); }
};

HelmholtzSystem assemble_system(const Mesh& mesh, const Vector& kappa, double c, double beta);

SparseComplexMatrix system_matrix(const HelmholtzSystem& sys, double omega);
SparseComplexMatrix system_matrix_derivative(const HelmholtzSystem& sys, double omega);

/// Domain load vector f_i = integral(f * phi_i) for a nodal-linear f.
ComplexVector assemble_load(const Mesh& mesh, const ComplexVector& f_nodal);

/// Inhomogeneous Neumann contribution integral_{neumann_g}(g * phi_i): point
/// evaluation in 1d, edge quadrature of a nodal-linear g in 2d. g_nodal is a
/// full-length nodal vector; only entries on neumann_g faces are read.
ComplexVector assemble_neumann(const Mesh& mesh, const ComplexVector& g_nodal);

/// Basis-function integrals integral(phi_i), the weights of the discrete
/// forcing covariance sandwich.
Vector basis_integrals(const Mesh& mesh);

/// Zero the Dirichlet entries of a right-hand side.
ComplexVector constrain(const HelmholtzSystem& sys, ComplexVector rhs);

/// Direct full-order solve at omega; checks the residual and reports omega in
/// the error when the system is (near-)singular, e.g. at a resonance.
ComplexVector solve_fom(const HelmholtzSystem& sys, double omega,
                        const ComplexVector& rhs_constrained);

/// Frequency-weighted H1 norm sqrt(k^-2 u* S1 u + u* M1 u) with unit-material
/// S1, M1 on the given mesh.
double hk1_norm(const Mesh& mesh, double k, const ComplexVector& u);

/// Same norm of (u_ref - interpolate(u)) evaluated on the reference mesh.
double hk1_error(const Mesh& ref_mesh, const ComplexVector& u_ref, const Mesh& mesh,
                 const ComplexVector& u, double k);

}  // namespace statrom
