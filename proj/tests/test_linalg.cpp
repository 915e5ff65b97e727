#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <complex>
#include <random>

#include "statrom/linalg.hpp"

using namespace statrom;

namespace {

std::mt19937 rng(20240811);

Complex rand_c() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Complex(u(rng), u(rng));
}

ComplexMatrix random_complex(int n) {
  ComplexMatrix A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rand_c();
  return A;
}

ComplexVector random_cvec(int n) {
  ComplexVector b(n);
  for (int i = 0; i < n; ++i) b(i) = rand_c();
  return b;
}

SparseComplexMatrix sparse_of(const ComplexMatrix& A) {
  return A.sparseView();
}

}  // namespace

TEST_CASE("lu solve with the identity returns the rhs") {
  ComplexMatrix I = ComplexMatrix::Identity(3, 3);
  LuFactors lu = lu_factor(sparse_of(I));
  ComplexVector b = random_cvec(3);
  CHECK((lu.solve(b) - b).norm() <= 1e-14 * b.norm());
  CHECK((lu.solve(b, SolveMode::adjoint) - b).norm() <= 1e-14 * b.norm());
}

TEST_CASE("diagonal complex solve") {
  ComplexMatrix A = ComplexMatrix::Zero(2, 2);
  A(0, 0) = Complex(2.0, 0.0);
  A(1, 1) = Complex(0.0, 4.0);
  ComplexVector b(2);
  b << Complex(2.0, 0.0), Complex(0.0, 4.0);
  ComplexVector x = lu_factor(sparse_of(A)).solve(b);
  CHECK(std::abs(x(0) - Complex(1.0, 0.0)) <= 1e-15);
  CHECK(std::abs(x(1) - Complex(1.0, 0.0)) <= 1e-15);
}

TEST_CASE("random well-conditioned 8x8 residual") {
  ComplexMatrix A = random_complex(8);
  A += 4.0 * ComplexMatrix::Identity(8, 8);
  ComplexVector b = random_cvec(8);
  LuFactors lu = lu_factor(sparse_of(A));
  ComplexVector x = lu.solve(b);
  CHECK((A * x - b).norm() <= 1e-12 * b.norm());
}

TEST_CASE("adjoint solve of a 1x1 system") {
  // A = (1+i), A^H x = b with b = (1+i): x = (1+i)/(1-i) = i
  ComplexMatrix A(1, 1);
  A(0, 0) = Complex(1.0, 1.0);
  ComplexVector b(1);
  b(0) = Complex(1.0, 1.0);
  ComplexVector x = lu_solve(lu_factor(sparse_of(A)), b, SolveMode::adjoint);
  CHECK(std::abs(x(0) - Complex(0.0, 1.0)) <= 1e-15);
}

TEST_CASE("hermitian matrix: direct and adjoint solves coincide") {
  ComplexMatrix B = random_complex(6);
  ComplexMatrix A = B + B.adjoint();
  A += 6.0 * ComplexMatrix::Identity(6, 6);
  ComplexVector b = random_cvec(6);
  LuFactors lu = lu_factor(sparse_of(A));
  CHECK((lu.solve(b) - lu.solve(b, SolveMode::adjoint)).norm() <= 1e-12 * b.norm());
}

TEST_CASE("zero rhs gives zero solution") {
  ComplexMatrix A = random_complex(5) + 3.0 * ComplexMatrix::Identity(5, 5);
  ComplexVector x = lu_factor(sparse_of(A)).solve(ComplexVector::Zero(5));
  CHECK(x.norm() == 0.0);
}

TEST_CASE("lu error reporting") {
  CHECK_THROWS_AS(lu_factor(SparseComplexMatrix(2, 3)), std::invalid_argument);

  ComplexMatrix S = ComplexMatrix::Zero(2, 2);
  S(0, 0) = 1.0;  // second pivot is exactly zero
  CHECK_THROWS_AS(lu_factor(sparse_of(S)), std::runtime_error);

  LuFactors lu = lu_factor(sparse_of(ComplexMatrix::Identity(3, 3)));
  CHECK_THROWS_AS(lu.solve(ComplexVector::Zero(4)), std::invalid_argument);
}

TEST_CASE("residual stays small on moderately ill-conditioned systems") {
  // row scaling over five decades pushes the condition number to ~1e5
  ComplexMatrix A = random_complex(30) + 6.0 * ComplexMatrix::Identity(30, 30);
  for (int i = 0; i < 30; ++i) A.row(i) *= std::pow(10.0, -2.5 + 5.0 * i / 29.0);
  ComplexVector b = random_cvec(30);
  ComplexVector x = lu_factor(sparse_of(A)).solve(b);
  CHECK((A * x - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("orthonormal_extend: plain normalization") {
  ComplexMatrix B(2, 0);
  ComplexVector w(2);
  w << 3.0, 0.0;
  OrthoResult r = orthonormal_extend(B, 0, w);
  CHECK(!r.deflated);
  CHECK(r.norm == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(r.vec(0) - Complex(1.0, 0.0)) <= 1e-15);
  CHECK(std::abs(r.vec(1)) <= 1e-15);
}

TEST_CASE("orthonormal_extend: repeated vector deflates") {
  ComplexMatrix B = ComplexMatrix::Identity(2, 1);
  ComplexVector w(2);
  w << 1.0, 0.0;
  CHECK(orthonormal_extend(B, 1, w).deflated);
  CHECK(orthonormal_extend(B, 1, ComplexVector::Zero(2)).deflated);
}

TEST_CASE("orthonormal_extend: diagonal vector against e1") {
  ComplexMatrix B = ComplexMatrix::Identity(2, 1);
  ComplexVector w(2);
  const double s = 1.0 / std::sqrt(2.0);
  w << s, s;
  OrthoResult r = orthonormal_extend(B, 1, w);
  CHECK(!r.deflated);
  CHECK(r.norm == doctest::Approx(s).epsilon(1e-14));
  CHECK(std::abs(r.vec(0)) <= 1e-15);
  CHECK(std::abs(r.vec(1) - Complex(1.0, 0.0)) <= 1e-14);
}

TEST_CASE("orthonormal_extend keeps the basis orthonormal") {
  const int n = 24;
  ComplexMatrix B(n, 8);
  Eigen::Index cols = 0;
  while (cols < 8) {
    ComplexVector w = random_cvec(n);
    OrthoResult r = orthonormal_extend(B, cols, w);
    REQUIRE(!r.deflated);
    // Pythagoras: |w|^2 splits into the projection and the remainder
    double proj2 = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) proj2 += std::norm(B.col(j).dot(w));
    CHECK(proj2 + r.norm * r.norm == doctest::Approx(w.squaredNorm()).epsilon(1e-12));
    B.col(cols++) = r.vec;
  }
  ComplexMatrix G = B.adjoint() * B;
  CHECK((G - ComplexMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sym_eig on a 2x2 correlation matrix") {
  Matrix C(2, 2);
  C << 1.0, 0.5, 0.5, 1.0;
  EigenPairs ep = sym_eig(C);
  CHECK(ep.values(0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(ep.values(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("sym_eig on identity and diagonal inputs") {
  EigenPairs id = sym_eig(Matrix::Identity(4, 4));
  for (int i = 0; i < 4; ++i) CHECK(id.values(i) == doctest::Approx(1.0).epsilon(1e-14));

  Vector d(3);
  d << 3.0, 1.0, 2.0;
  EigenPairs ep = sym_eig(Matrix(d.asDiagonal()));
  CHECK(ep.values(0) == doctest::Approx(3.0));
  CHECK(ep.values(1) == doctest::Approx(2.0));
  CHECK(ep.values(2) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig rejects non-symmetric input") {
  Matrix C(2, 2);
  C << 1.0, 0.2, 0.4, 1.0;
  CHECK_THROWS_AS(sym_eig(C), std::invalid_argument);
}

TEST_CASE("sym_eig reconstruction and orthonormality at size 200") {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix R(200, 200);
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j) R(i, j) = u(rng);
  Matrix C = 0.5 * (R + R.transpose());
  EigenPairs ep = sym_eig(C);
  for (int i = 1; i < 200; ++i) CHECK(ep.values(i) <= ep.values(i - 1) + 1e-12);
  const Matrix recon = ep.vectors * ep.values.asDiagonal() * ep.vectors.transpose();
  CHECK((recon - C).norm() <= 1e-10 * C.norm());
  CHECK((ep.vectors.transpose() * ep.vectors - Matrix::Identity(200, 200)).cwiseAbs().maxCoeff() <=
        1e-10);
  for (int i = 0; i < 200; ++i) {
    const Vector r = C * ep.vectors.col(i) - ep.values(i) * ep.vectors.col(i);
    CHECK(r.norm() <= 1e-10 * C.norm());
  }
}
