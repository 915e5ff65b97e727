#include "statrom/linalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace statrom {

LuFactors::LuFactors(const SparseComplexMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("lu_factor: matrix not square");
  n_ = A.rows();
  lu_ = std::make_shared<Eigen::SparseLU<SparseComplexMatrix>>();
  SparseComplexMatrix Ac = A;
  Ac.makeCompressed();
  lu_->compute(Ac);
  if (lu_->info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "lu_factor: factorization failed (" << lu_->lastErrorMessage() << ")";
    throw std::runtime_error(msg.str());
  }
  // SparseLU can succeed with an exactly zero pivot on some singular inputs;
  // reject those here so callers never see NaN/Inf solutions silently.
  const auto& diag = lu_->matrixU();
  (void)diag;
  ComplexVector probe = ComplexVector::Ones(n_);
  ComplexVector x = lu_->solve(probe);
  if (!x.allFinite()) throw std::runtime_error("lu_factor: singular matrix (non-finite pivot)");
}

ComplexVector LuFactors::solve(const ComplexVector& b, SolveMode mode) const {
  if (b.size() != n_) throw std::invalid_argument("lu_solve: size mismatch");
  ComplexVector x;
  if (mode == SolveMode::direct)
    x = lu_->solve(b);
  else
    x = lu_->adjoint().solve(b);
  if (!x.allFinite()) throw std::runtime_error("lu_solve: non-finite solution (singular factor?)");
  return x;
}

LuFactors lu_factor(const SparseComplexMatrix& A) { return LuFactors(A); }

ComplexVector lu_solve(const LuFactors& lu, const ComplexVector& b, SolveMode mode) {
  return lu.solve(b, mode);
}

OrthoResult orthonormal_extend(const ComplexMatrix& basis, Eigen::Index ncols,
                               const ComplexVector& w, double tol) {
  OrthoResult out;
  const double wnorm = w.norm();
  ComplexVector v = w;
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < ncols; ++j) {
      const Complex h = basis.col(j).dot(v);  // conjugated in the first factor
      v.noalias() -= h * basis.col(j);
    }
  }
  out.norm = v.norm();
  if (out.norm <= tol * wnorm || wnorm == 0.0) {
    out.deflated = true;
    out.vec = ComplexVector::Zero(w.size());
    return out;
  }
  out.vec = v / out.norm;
  return out;
}

EigenPairs sym_eig(const Matrix& C) {
  if (C.rows() != C.cols()) throw std::invalid_argument("sym_eig: matrix not square");
  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  const double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) throw std::invalid_argument("sym_eig: matrix not symmetric");
  Matrix Cs = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Cs);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: did not converge");
  // SelfAdjointEigenSolver sorts ascending; flip to descending.
  const Eigen::Index n = C.rows();
  EigenPairs out;
  out.values = es.eigenvalues().reverse();
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) out.vectors.col(j) = es.eigenvectors().col(n - 1 - j);
  return out;
}

}  // namespace statrom
