#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "statrom/assembly.hpp"
#include "statrom/mesh.hpp"

using namespace statrom;
using std::numbers::pi;

namespace {

HelmholtzSystem unit_interval_system(int n, double c = 343.0, double beta = 0.0) {
  const Mesh m = build_interval_mesh(n, 1.0);
  return assemble_system(m, Vector::Ones(m.n_nodes()), c, beta);
}

bool boundary_node(const Mesh& m, int i) {
  for (const auto& b : m.boundary)
    if (b.nodes[0] == i || (m.dim == 2 && b.nodes[1] == i)) return true;
  return false;
}

}  // namespace

TEST_CASE("hand-integrated stiffness and mass on two linear elements") {
  const Mesh m = build_interval_mesh(2, 1.0);
  const HelmholtzSystem sys = assemble_system(m, Vector::Ones(3), 343.0, 0.0);

  Matrix S_exact(3, 3), M_exact(3, 3);
  S_exact << 2, -2, 0, -2, 4, -2, 0, -2, 2;
  M_exact << 1.0 / 6, 1.0 / 12, 0, 1.0 / 12, 1.0 / 3, 1.0 / 12, 0, 1.0 / 12, 1.0 / 6;

  const ComplexMatrix S = ComplexMatrix(sys.S);
  const ComplexMatrix M = ComplexMatrix(sys.M);
  CHECK((S.real() - S_exact).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(S.imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK((M.real() - M_exact).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(ComplexMatrix(sys.D).cwiseAbs().maxCoeff() == 0.0);  // no impedance faces
}

TEST_CASE("kappa weights the mass matrix only") {
  const Mesh m = build_interval_mesh(2, 1.0);
  Vector kappa(3);
  kappa << 2.0, 2.0, 2.0;
  const HelmholtzSystem sys = assemble_system(m, kappa, 343.0, 0.0);
  const HelmholtzSystem ref = assemble_system(m, Vector::Ones(3), 343.0, 0.0);
  CHECK((ComplexMatrix(sys.S) - ComplexMatrix(ref.S)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ComplexMatrix(sys.M) - 2.0 * ComplexMatrix(ref.M)).cwiseAbs().maxCoeff() <= 1e-14);

  Vector bad(3);
  bad << 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(assemble_system(m, bad, 343.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(assemble_system(m, Vector::Ones(2), 343.0, 0.0), std::invalid_argument);
}

TEST_CASE("system matrix limits") {
  const HelmholtzSystem sys = unit_interval_system(10);

  // omega 0 kills the mass and damping terms
  const ComplexMatrix A0 = ComplexMatrix(system_matrix(sys, 0.0));
  CHECK((A0 - ComplexMatrix(sys.S_bc)).cwiseAbs().maxCoeff() == 0.0);

  // no damping: real and symmetric
  const ComplexMatrix A = ComplexMatrix(system_matrix(sys, 2.0 * pi * 460.0));
  CHECK(A.imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("one-unknown system by hand") {
  HelmholtzSystem sys;
  sys.S.resize(1, 1);
  sys.S.insert(0, 0) = Complex(2.0, 0.0);
  sys.M.resize(1, 1);
  sys.M.insert(0, 0) = Complex(1.0, 0.0);
  sys.D.resize(1, 1);
  sys.S_bc = sys.S;
  sys.M_bc = sys.M;
  sys.D_bc = sys.D;
  sys.c = 1.0;
  sys.beta = 0.0;
  const ComplexMatrix A = ComplexMatrix(system_matrix(sys, 1.0));
  CHECK(A(0, 0) == Complex(1.0, 0.0));
}

TEST_CASE("dirichlet elimination keeps unit diagonal and zero coupling") {
  const Mesh m = build_interval_mesh(10, 1.0, BoundaryTag::dirichlet, BoundaryTag::neumann_0);
  const HelmholtzSystem sys = assemble_system(m, Vector::Ones(11), 343.0, 0.0);
  REQUIRE(sys.dirichlet == std::vector<int>{0});

  const ComplexMatrix A = ComplexMatrix(system_matrix(sys, 100.0));
  CHECK(A(0, 0) == Complex(1.0, 0.0));
  CHECK(A.row(0).tail(10).cwiseAbs().maxCoeff() == 0.0);
  CHECK(A.col(0).tail(10).cwiseAbs().maxCoeff() == 0.0);

  // the derivative keeps constrained rows exactly zero
  const ComplexMatrix Ap = ComplexMatrix(system_matrix_derivative(sys, 100.0));
  CHECK(Ap.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Ap.col(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite-difference check of the frequency derivative") {
  const Mesh m = build_scatterer_mesh(1.0, 0.5, 0.5, 0.25, 12);
  const HelmholtzSystem sys = assemble_system(m, Vector::Ones(m.n_nodes()), 343.0, 1.0);
  const double w = 2.0 * pi * 360.0, dw = 1e-3;
  const ComplexMatrix fd =
      (ComplexMatrix(system_matrix(sys, w + dw)) - ComplexMatrix(system_matrix(sys, w - dw))) /
      (2.0 * dw);
  const ComplexMatrix Ap = ComplexMatrix(system_matrix_derivative(sys, w));
  CHECK((fd - Ap).cwiseAbs().maxCoeff() <= 1e-8 * Ap.cwiseAbs().maxCoeff());
}

TEST_CASE("load and boundary forcing vectors") {
  const Mesh m = build_interval_mesh(4, 1.0);
  const double h = 0.25;

  const ComplexVector load = assemble_load(m, ComplexVector::Ones(5));
  CHECK(std::abs(load(0) - Complex(h / 2, 0)) <= 1e-15);
  CHECK(std::abs(load(4) - Complex(h / 2, 0)) <= 1e-15);
  for (int i = 1; i < 4; ++i) CHECK(std::abs(load(i) - Complex(h, 0)) <= 1e-15);

  CHECK(assemble_load(m, ComplexVector::Zero(5)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(assemble_neumann(m, ComplexVector::Zero(5)).cwiseAbs().maxCoeff() == 0.0);

  // inhomogeneous Neumann data enters as a point value on the tagged end
  const double g = pi * pi / 50.0;
  const ComplexVector fn = assemble_neumann(m, ComplexVector::Constant(5, Complex(g, 0)));
  CHECK(fn(0) == Complex(g, 0.0));
  CHECK(fn.tail(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("neumann edge quadrature in 2d sums to the boundary integral") {
  // retag the outer square of a plain grid as neumann_g; g = 1 integrates to
  // the perimeter
  Mesh m = build_scatterer_mesh(1.0, 0.5, 0.5, 0.0, 8);
  for (auto& b : m.boundary) b.tag = BoundaryTag::neumann_g;
  const ComplexVector fn = assemble_neumann(m, ComplexVector::Ones(m.n_nodes()));
  CHECK(std::abs(fn.sum() - Complex(4.0, 0.0)) <= 1e-12);
}

TEST_CASE("solve_fom matches a dense factorization oracle") {
  const HelmholtzSystem sys = unit_interval_system(100);
  const Mesh m = build_interval_mesh(100, 1.0);
  const double omega = 2.0 * pi * 460.0;

  ComplexVector g = ComplexVector::Zero(101);
  g(0) = Complex(pi * pi / 50.0, 0.0);
  const ComplexVector rhs = constrain(sys, assemble_neumann(m, g));

  const ComplexVector u = solve_fom(sys, omega, rhs);
  const ComplexMatrix A = ComplexMatrix(system_matrix(sys, omega));
  const ComplexVector u_dense = Eigen::FullPivLU<ComplexMatrix>(A).solve(rhs);
  CHECK((u - u_dense).norm() <= 1e-12 * u_dense.norm());
  CHECK((A * u - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("solve_fom trivial and singular cases") {
  const HelmholtzSystem sys = unit_interval_system(20);
  const ComplexVector zero = ComplexVector::Zero(21);
  CHECK(solve_fom(sys, 2.0 * pi * 100.0, zero).cwiseAbs().maxCoeff() == 0.0);

  // pure Neumann at omega 0 has the constant-function kernel
  ComplexVector rhs = ComplexVector::Zero(21);
  rhs(0) = Complex(1.0, 0.0);
  CHECK_THROWS_WITH_AS(solve_fom(sys, 0.0, rhs), doctest::Contains("omega = 0"),
                       std::runtime_error);
}

TEST_CASE("dirichlet solution entries are exactly zero") {
  const Mesh m = build_scatterer_mesh(1.0, 0.5, 0.5, 0.25, 16);
  const HelmholtzSystem sys = assemble_system(m, Vector::Ones(m.n_nodes()), 343.0, 1.0);
  const ComplexVector rhs = constrain(sys, assemble_load(m, ComplexVector::Ones(m.n_nodes())));
  const ComplexVector u = solve_fom(sys, 2.0 * pi * 360.0, rhs);
  for (int i : sys.dirichlet) CHECK(u(i) == Complex(0.0, 0.0));
  CHECK(u.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("without damping the system equals its adjoint") {
  const HelmholtzSystem sys = unit_interval_system(30);
  const double omega = 2.0 * pi * 250.0;
  const SparseComplexMatrix A = system_matrix(sys, omega);
  const LuFactors lu = lu_factor(A);

  ComplexVector rhs(31);
  for (int i = 0; i < 31; ++i) rhs(i) = Complex(std::sin(0.3 * i), std::cos(0.7 * i));
  const ComplexVector direct = lu_solve(lu, rhs, false);
  const ComplexVector adjoint = lu_solve(lu, rhs, true);
  CHECK((direct - adjoint).norm() <= 1e-12 * direct.norm());
}

TEST_CASE("patch test: linear fields are stiffness-free in the interior") {
  const Mesh m1 = build_interval_mesh(17, 1.0);
  const HelmholtzSystem s1 = assemble_system(m1, Vector::Ones(18), 343.0, 0.0);
  ComplexVector lin1(18);
  for (Eigen::Index i = 0; i < 18; ++i) lin1(i) = Complex(0.4 + 2.0 * m1.nodes(i, 0), 0.0);
  const ComplexVector r1 = SparseComplexMatrix(s1.S) * lin1;
  for (Eigen::Index i = 1; i < 17; ++i) CHECK(std::abs(r1(i)) <= 1e-12);

  const Mesh m2 = build_scatterer_mesh(1.0, 0.5, 0.5, 0.25, 12);
  const HelmholtzSystem s2 = assemble_system(m2, Vector::Ones(m2.n_nodes()), 343.0, 1.0);
  ComplexVector lin2(m2.n_nodes());
  for (Eigen::Index i = 0; i < m2.n_nodes(); ++i)
    lin2(i) = Complex(1.0 - 0.8 * m2.nodes(i, 0) + 0.5 * m2.nodes(i, 1), 0.0);
  const ComplexVector r2 = SparseComplexMatrix(s2.S) * lin2;
  for (Eigen::Index i = 0; i < m2.n_nodes(); ++i)
    if (!boundary_node(m2, static_cast<int>(i))) CHECK(std::abs(r2(i)) <= 1e-12);
}

TEST_CASE("frequency-weighted norm and error") {
  const Mesh ref = build_interval_mesh(2000, 1.0);
  const Mesh coarse = build_interval_mesh(100, 1.0);

  ComplexVector x_ref(ref.n_nodes());
  for (Eigen::Index i = 0; i < ref.n_nodes(); ++i) x_ref(i) = Complex(ref.nodes(i, 0), 0.0);

  CHECK(hk1_error(ref, x_ref, ref, x_ref, 1.0) <= 1e-14);

  const double base = hk1_error(ref, x_ref, coarse, ComplexVector::Zero(101), 1.0);
  CHECK(std::abs(base - std::sqrt(4.0 / 3.0)) <= 1e-3);

  // absolute homogeneity, including a complex scale
  const Complex alpha(0.0, -2.5);
  const double scaled = hk1_error(ref, alpha * x_ref, coarse, ComplexVector::Zero(101), 1.0);
  CHECK(scaled == doctest::Approx(2.5 * base).epsilon(1e-12));

  CHECK(hk1_norm(coarse, 2.0, ComplexVector::Zero(101)) == 0.0);
  CHECK_THROWS_AS(hk1_norm(coarse, 0.0, x_ref.head(101)), std::invalid_argument);
  CHECK_THROWS_AS(hk1_error(ref, x_ref, coarse, ComplexVector::Zero(101), 0.0),
                  std::invalid_argument);
}
