#pragma once

#include <complex>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace statrom {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseComplexMatrix = Eigen::SparseMatrix<Complex>;

enum class SolveMode { direct, adjoint };

/// Sparse LU of a complex system matrix. Factors once, solves many times,
/// in either the direct (A x = b) or adjoint (A^H x = b) sense. Instances
/// are shared between reduced bases through shared_ptr so a basis keeps its
/// factorization alive.
class LuFactors {
public:
  explicit LuFactors(const SparseComplexMatrix& A);

  ComplexVector solve(const ComplexVector& b, SolveMode mode = SolveMode::direct) const;
  Eigen::Index size() const { return n_; }

private:
  std::shared_ptr<Eigen::SparseLU<SparseComplexMatrix>> lu_;
  Eigen::Index n_ = 0;
};

LuFactors lu_factor(const SparseComplexMatrix& A);
ComplexVector lu_solve(const LuFactors& lu, const ComplexVector& b,
                       SolveMode mode = SolveMode::direct);

/// Orthonormalize w against the first ncols columns of basis (modified
/// Gram-Schmidt, one re-orthogonalization pass). norm is the length of the
/// remainder before normalization; deflated is set when that length falls
/// below tol * |w|, in which case vec is not usable.
struct OrthoResult {
  ComplexVector vec;
  double norm = 0.0;
  bool deflated = false;
};

OrthoResult orthonormal_extend(const ComplexMatrix& basis, Eigen::Index ncols,
                               const ComplexVector& w, double tol = 1e-12);

/// Eigen-decomposition of a symmetric real matrix, eigenvalues descending.
/// Throws if C is not symmetric to 1e-12 (relative to its largest entry).
struct EigenPairs {
  Vector values;
  Matrix vectors;  // columns are eigenvectors, same order as values
};

EigenPairs sym_eig(const Matrix& C);

}  // namespace statrom
