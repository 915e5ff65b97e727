#include "statrom/rom.hpp"

#include <stdexcept>

namespace statrom {

Recurrence recurrence_from_string(const std::string& s) {
  if (s == "second-derivative") return Recurrence::second_derivative;
  if (s == "imaginary-mass") return Recurrence::imaginary_mass;
  throw std::invalid_argument("unknown recurrence variant: " + s);
}

namespace {

// Arnoldi on T = A^-1 M (or its adjoint), exact-arithmetic equivalent of the
// moment recurrence when no damping block is present.
ComplexMatrix arnoldi_single(const LuFactors& lu, const SparseComplexMatrix& M,
                             const ComplexVector& s0, int m, bool adjoint, double tol) {
  const Eigen::Index n = s0.size();
  ComplexMatrix V(n, m);
  V.col(0) = s0 / s0.norm();
  int r = 1;
  const SolveMode mode = adjoint ? SolveMode::adjoint : SolveMode::direct;
  for (int j = 1; j < m; ++j) {
    ComplexVector w = adjoint ? lu.solve(M.adjoint() * V.col(j - 1), mode)
                              : lu.solve(M * V.col(j - 1), mode);
    OrthoResult o = orthonormal_extend(V, r, w, tol);
    if (o.deflated) break;
    V.col(r++) = o.vec;
  }
  return V.leftCols(r);
}

// Arnoldi on the companion operator [[L, B], [I, 0]] for the damped case;
// the moment space is the span of the top and bottom blocks of the companion
// Krylov vectors, extracted by a rank-revealing SVD.
ComplexMatrix arnoldi_companion(const LuFactors& lu, const SparseComplexMatrix& Ap,
                                const SparseComplexMatrix& Bmat, const ComplexVector& s0,
                                int m, bool adjoint, double tol) {
  const Eigen::Index n = s0.size();
  const SolveMode mode = adjoint ? SolveMode::adjoint : SolveMode::direct;
  auto apply_L = [&](const ComplexVector& v) -> ComplexVector {
    return adjoint ? -lu.solve(Ap.adjoint() * v, mode) : -lu.solve(Ap * v, mode);
  };
  auto apply_B = [&](const ComplexVector& v) -> ComplexVector {
    return adjoint ? -lu.solve(Bmat.adjoint() * v, mode) : -lu.solve(Bmat * v, mode);
  };

  ComplexMatrix W(2 * n, m);
  W.col(0).head(n) = s0 / s0.norm();
  W.col(0).tail(n).setZero();
  int r = 1;
  for (int j = 1; j < m; ++j) {
    ComplexVector w(2 * n);
    w.head(n) = apply_L(W.col(j - 1).head(n)) + apply_B(W.col(j - 1).tail(n));
    w.tail(n) = W.col(j - 1).head(n);
    OrthoResult o = orthonormal_extend(W, r, w, tol);
    if (o.deflated) break;
    W.col(r++) = o.vec;
  }
  ComplexMatrix blocks(n, 2 * r);
  blocks.leftCols(r) = W.topRows(n).leftCols(r);
  blocks.rightCols(r) = W.bottomRows(n).leftCols(r);
  Eigen::JacobiSVD<ComplexMatrix> svd(blocks, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-13 * sv(0)) ++rank;
  rank = std::min(rank, m);
  return svd.matrixU().leftCols(rank);
}

}  // namespace

RomBasis build_basis(const HelmholtzSystem& sys, const ComplexVector& rhs_constrained,
                     double omega_bar, int m, std::shared_ptr<const LuFactors> lu,
                     bool adjoint, Recurrence rec, double deflation_tol) {
  if (m < 1) throw std::invalid_argument("build_basis: order must be >= 1");
  if (rhs_constrained.size() != sys.n())
    throw std::invalid_argument("build_basis: rhs size mismatch");
  RomBasis basis;
  basis.omega_bar = omega_bar;
  basis.order = m;
  basis.adjoint = adjoint;
  if (!lu) {
    try {
      lu = std::make_shared<const LuFactors>(system_matrix(sys, omega_bar));
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("build_basis: A(omega_bar) singular: ") + e.what());
    }
  }
  basis.lu = lu;

  const SolveMode mode = adjoint ? SolveMode::adjoint : SolveMode::direct;
  const ComplexVector s0 = lu->solve(rhs_constrained, mode);
  if (s0.norm() == 0.0) {
    basis.V.resize(sys.n(), 0);
    return basis;
  }

  const bool damped = sys.beta != 0.0 && sys.D_bc.nonZeros() > 0;
  if (!damped) {
    basis.V = arnoldi_single(*lu, sys.M_bc, s0, m, adjoint, deflation_tol);
    return basis;
  }

  const SparseComplexMatrix Ap = system_matrix_derivative(sys, omega_bar);
  SparseComplexMatrix Bmat;
  if (rec == Recurrence::second_derivative) {
    // B = -A^-1 (A''/2) with A'' = -2 M / c^2
    Bmat = Complex(-1.0 / (sys.c * sys.c), 0) * sys.M_bc;
  } else {
    Bmat = Complex(0, 1.0) * sys.M_bc;
  }
  basis.V = arnoldi_companion(*lu, Ap, Bmat, s0, m, adjoint, deflation_tol);
  return basis;
}

ReducedSystem reduce(const HelmholtzSystem& sys, const RomBasis& basis,
                     const ComplexVector& rhs_constrained) {
  ReducedSystem red;
  red.c = sys.c;
  red.beta = sys.beta;
  const ComplexMatrix& V = basis.V;
  red.S_r = V.adjoint() * (sys.S_bc * V);
  red.M_r = V.adjoint() * (sys.M_bc * V);
  red.D_r = V.adjoint() * (sys.D_bc * V);
  red.f_r = V.adjoint() * rhs_constrained;
  return red;
}

RomBasis truncate(const RomBasis& basis, int r) {
  if (r < 0 || r > basis.V.cols()) throw std::invalid_argument("truncate: bad order");
  RomBasis out = basis;
  out.V = basis.V.leftCols(r);
  out.order = r;
  return out;
}

ReducedSystem truncate(const ReducedSystem& red, int r) {
  if (r < 0 || r > red.order()) throw std::invalid_argument("truncate: bad order");
  ReducedSystem out;
  out.c = red.c;
  out.beta = red.beta;
  out.S_r = red.S_r.topLeftCorner(r, r);
  out.M_r = red.M_r.topLeftCorner(r, r);
  out.D_r = red.D_r.topLeftCorner(r, r);
  out.f_r = red.f_r.head(r);
  return out;
}

ComplexVector solve_reduced(const ReducedSystem& red, double omega) {
  const double k = omega / red.c;
  ComplexMatrix Ar = red.S_r - Complex(k * k, 0) * red.M_r - Complex(0, k * red.beta) * red.D_r;
  Eigen::FullPivLU<ComplexMatrix> lu(Ar);
  if (!lu.isInvertible())
    throw std::runtime_error("solve_reduced: reduced matrix singular at omega = " +
                             std::to_string(omega));
  return lu.solve(red.f_r);
}

ComplexVector lift(const RomBasis& basis, const ComplexVector& u_r) {
  if (u_r.size() != basis.V.cols()) throw std::invalid_argument("lift: size mismatch");
  return basis.V * u_r;
}

}  // namespace statrom
