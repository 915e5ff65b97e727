#include "statrom/adjoint_error.hpp"

#include <cmath>
#include <stdexcept>

namespace statrom {

AdjointSet build_adjoint_set(const HelmholtzSystem& sys, const Mesh& mesh, const Matrix& points,
                             double omega_bar, int m, std::shared_ptr<const LuFactors> lu,
                             Recurrence rec) {
  AdjointSet set;
  set.points = points;
  // row-major so the inner iteration below walks row i (= point i)
  const Eigen::SparseMatrix<double, Eigen::RowMajor> P = interpolation_matrix(mesh, points);
  std::vector<char> mask(sys.n(), 0);
  for (int d : sys.dirichlet) mask[d] = 1;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::SparseVector<double> p(sys.n());
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(P, i); it; ++it)
      if (!mask[it.col()]) p.coeffRef(it.col()) = it.value();
    set.extractors.push_back(p);
    ComplexVector rhs = ComplexVector::Zero(sys.n());
    for (Eigen::SparseVector<double>::InnerIterator it(p); it; ++it)
      rhs(it.index()) = it.value();
    set.bases.push_back(build_basis(sys, rhs, omega_bar, m, lu, /*adjoint=*/true, rec));
  }
  return set;
}

namespace {

ComplexVector extractor_vector(const Eigen::SparseVector<double>& p, Eigen::Index n) {
  ComplexVector out = ComplexVector::Zero(n);
  for (Eigen::SparseVector<double>::InnerIterator it(p); it; ++it) out(it.index()) = it.value();
  return out;
}

}  // namespace

ComplexVector reduced_dual_solution(const SparseComplexMatrix& A, const RomBasis& adj_basis,
                                    const Eigen::SparseVector<double>& p) {
  const ComplexMatrix& V = adj_basis.V;
  if (V.cols() == 0) return ComplexVector::Zero(A.rows());
  const ComplexVector pv = extractor_vector(p, A.rows());
  // dual: A^H q = p projected onto the adjoint basis
  const ComplexMatrix Ar_h = V.adjoint() * (A.adjoint() * V);
  Eigen::FullPivLU<ComplexMatrix> lu(Ar_h);
  if (!lu.isInvertible())
    throw std::runtime_error("reduced_dual_solution: reduced adjoint matrix singular");
  return V * lu.solve(V.adjoint() * pv);
}

Complex reduced_adjoint_error(const SparseComplexMatrix& A, const RomBasis& adj_basis,
                              const Eigen::SparseVector<double>& p,
                              const ComplexVector& rhs_constrained,
                              const ComplexVector& u_lifted) {
  const ComplexVector q = reduced_dual_solution(A, adj_basis, p);
  return q.dot(rhs_constrained - A * u_lifted);  // dot conjugates q
}

Complex direct_adjoint_error(const SparseComplexMatrix& A,
                             const Eigen::SparseVector<double>& p,
                             const ComplexVector& rhs_constrained,
                             const ComplexVector& u_lifted) {
  const ComplexVector pv = extractor_vector(p, A.rows());
  LuFactors lu(A);
  const ComplexVector q = lu.solve(pv, SolveMode::adjoint);
  return q.dot(rhs_constrained - A * u_lifted);
}

ErrorField regress_error_field(const Mesh& mesh, const Matrix& points,
                               const ComplexVector& d_mean, const Vector& noise_var,
                               double omega, double c) {
  if (points.rows() != d_mean.size())
    throw std::invalid_argument("regress_error_field: points/values mismatch");
  if (noise_var.size() != points.rows())
    throw std::invalid_argument("regress_error_field: noise/points mismatch");
  if ((noise_var.array() < 0.0).any())
    throw std::invalid_argument("regress_error_field: negative noise");
  const std::vector<int> dir = dirichlet_nodes(mesh);
  const Eigen::Index nt = points.rows(), nd = static_cast<Eigen::Index>(dir.size());

  ErrorField out;
  out.train_points.resize(nt + nd, mesh.dim);
  out.train_points.topRows(nt) = points;
  for (Eigen::Index i = 0; i < nd; ++i) out.train_points.row(nt + i) = mesh.nodes.row(dir[i]);
  out.train_values = ComplexVector::Zero(nt + nd);
  out.train_values.head(nt) = d_mean;

  MaternKernel kern;
  kern.nu = 2.5;
  kern.ell = 2.0 * M_PI * c / omega;  // one wavelength
  const double dmax = (nt > 0) ? d_mean.cwiseAbs().maxCoeff() : 0.0;
  kern.sigma = std::max(2.0 * dmax, 1e-12);
  out.sigma2 = kern.sigma * kern.sigma;

  Matrix K = kernel_matrix(kern, out.train_points);
  for (Eigen::Index i = 0; i < nt; ++i) K(i, i) += noise_var(i);  // Dirichlet rows stay noise-free
  K.diagonal().array() += 1e-10 * out.sigma2;
  Eigen::LDLT<Matrix> ldlt(K);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("regress_error_field: kernel factorization failed");

  const Matrix Kx = kernel_matrix(kern, mesh.nodes, out.train_points);
  const Vector a_re = ldlt.solve(out.train_values.real());
  const Vector a_im = ldlt.solve(out.train_values.imag());
  out.mean = ComplexVector(mesh.n_nodes());
  out.mean.real() = Kx * a_re;
  out.mean.imag() = Kx * a_im;

  Matrix Kxx = kernel_matrix(kern, mesh.nodes);
  out.cov = Kxx - Kx * ldlt.solve(Kx.transpose());
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();

  for (int d : dir) out.mean(d) = 0.0;  // exact zeros at constrained nodes
  return out;
}

std::pair<Complex, double> closed_form_error(const HelmholtzSystem& sys, double omega,
                                             const RomBasis& basis,
                                             const Eigen::SparseVector<double>& p,
                                             const ComplexVector& mu_f, const Matrix& C_f) {
  const SparseComplexMatrix A = system_matrix(sys, omega);
  const ComplexMatrix& V = basis.V;
  const ComplexVector pv = extractor_vector(p, sys.n());
  LuFactors lu(A);
  const ComplexVector q = lu.solve(pv, SolveMode::adjoint);

  const double k = omega / sys.c;
  ComplexMatrix Ar = V.adjoint() * (A * V);
  Eigen::FullPivLU<ComplexMatrix> rlu(Ar);
  if (!rlu.isInvertible()) throw std::runtime_error("closed_form_error: reduced matrix singular");
  const ComplexMatrix Bq = A * (V * rlu.inverse());  // B = A V A_r^-1
  (void)k;

  const ComplexVector mu_fr = V.adjoint() * mu_f;
  const Complex mean = q.dot(V * mu_fr - Bq * mu_fr);
  const ComplexMatrix Cf = C_f.cast<Complex>();
  const Complex v1 = q.dot(Cf * q);
  const ComplexVector w = Bq.adjoint() * q;
  const ComplexMatrix Cfr = V.adjoint() * (Cf * V);
  const Complex v2 = w.dot(Cfr * w);
  return {mean, std::max(0.0, v1.real() + v2.real())};
}

}  // namespace statrom
