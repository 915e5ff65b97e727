#pragma once

#include <memory>

#include "statrom/assembly.hpp"
#include "statrom/linalg.hpp"

namespace statrom {

/// Second block of the moment recurrence u_l = L u_{l-1} + B u_{l-2} at the
/// expansion point: second_derivative uses B = -A^-1 (A''/2) = A^-1 M / c^2,
/// which follows from the Taylor expansion of A(w) u(w) = f and is the
/// default; imaginary_mass uses B = -A^-1 (i M), kept for comparison (it
/// fails the derivative-matching checks on damped problems, see tests).
enum class Recurrence { second_derivative, imaginary_mass };

Recurrence recurrence_from_string(const std::string& s);

/// Orthonormal basis of the order-m moment space G_m span{u_0, ..., u_{m-1}}
/// at expansion point omega_bar, for the system or (adjoint = true) its
/// conjugate transpose. Columns may stop short of m when the space deflates.
struct RomBasis {
  ComplexMatrix V;  // n x r with r <= order
  double omega_bar = 0.0;
  int order = 0;
  bool adjoint = false;
  std::shared_ptr<const LuFactors> lu;  // factorization of A(omega_bar)
};

/// Build the basis. Without a damping operator the recurrence collapses to a
/// single-operator Krylov space (both L and B are multiples of T = A^-1 M),
/// which is built by a plain Arnoldi iteration on T; with damping the basis
/// comes from an Arnoldi iteration on the companion form [[L, B], [I, 0]]
/// (the numerically stable equivalent of iterating the recurrence directly).
/// Pass a factorization of A(omega_bar) to reuse it; otherwise one is built
/// and kept on the returned basis.
RomBasis build_basis(const HelmholtzSystem& sys, const ComplexVector& rhs_constrained,
                     double omega_bar, int m,
                     std::shared_ptr<const LuFactors> lu = nullptr, bool adjoint = false,
                     Recurrence rec = Recurrence::second_derivative,
                     double deflation_tol = 1e-12);

/// Galerkin projections of the operator blocks and a right-hand side onto a
/// basis; A_r(w) = S_r - k^2 M_r - i k beta D_r stays cheap to form per
/// frequency.
struct ReducedSystem {
  ComplexMatrix S_r, M_r, D_r;
  ComplexVector f_r;
  double c = 343.0;
  double beta = 0.0;
  Eigen::Index order() const { return S_r.rows(); }
};

ReducedSystem reduce(const HelmholtzSystem& sys, const RomBasis& basis,
                     const ComplexVector& rhs_constrained);

/// Leading r-column / r-block views for nested-order studies. Valid for
/// undamped problems, where the plain Arnoldi construction makes the order-r
/// basis a literal prefix of the order-m one; the damped companion-form
/// extraction is not nested.
RomBasis truncate(const RomBasis& basis, int r);
ReducedSystem truncate(const ReducedSystem& red, int r);

/// Solve the reduced system at omega; throws on a singular reduced matrix.
ComplexVector solve_reduced(const ReducedSystem& red, double omega);

ComplexVector lift(const RomBasis& basis, const ComplexVector& u_r);

}  // namespace statrom
