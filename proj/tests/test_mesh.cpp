#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <string>

#include "statrom/mesh.hpp"

using namespace statrom;

namespace {

// V - E + F of the triangulation: 1 for a disk-like region, 0 with one hole
int euler_number(const Mesh& m) {
  std::set<std::pair<int, int>> edges;
  for (Eigen::Index e = 0; e < m.n_elements(); ++e)
    for (int k = 0; k < 3; ++k) {
      int u = m.elements(e, k), v = m.elements(e, (k + 1) % 3);
      if (u > v) std::swap(u, v);
      edges.insert({u, v});
    }
  return static_cast<int>(m.n_nodes()) - static_cast<int>(edges.size()) +
         static_cast<int>(m.n_elements());
}

}  // namespace

TEST_CASE("interval mesh layout and tags") {
  const Mesh m = build_interval_mesh(100, 1.0);
  REQUIRE(m.n_nodes() == 101);
  REQUIRE(m.n_elements() == 100);
  CHECK(m.nodes(1, 0) - m.nodes(0, 0) == doctest::Approx(0.01).epsilon(1e-14));
  REQUIRE(m.boundary.size() == 2);
  CHECK(m.boundary[0].nodes[0] == 0);
  CHECK(m.boundary[0].tag == BoundaryTag::neumann_g);
  CHECK(m.boundary[1].nodes[0] == 100);
  CHECK(m.boundary[1].tag == BoundaryTag::neumann_0);

  double mn = 1e300, mx = 0.0;
  for (Eigen::Index e = 0; e < m.n_elements(); ++e) {
    const double h = element_measure(m, static_cast<int>(e));
    mn = std::min(mn, h);
    mx = std::max(mx, h);
  }
  CHECK(mx - mn <= 1e-14);
}

TEST_CASE("tiny interval meshes") {
  const Mesh one = build_interval_mesh(1, 1.0);
  CHECK(one.nodes(0, 0) == 0.0);
  CHECK(one.nodes(1, 0) == 1.0);

  const Mesh two = build_interval_mesh(2, 0.5);
  CHECK(two.nodes(0, 0) == 0.0);
  CHECK(two.nodes(1, 0) == doctest::Approx(0.25));
  CHECK(two.nodes(2, 0) == doctest::Approx(0.5));

  CHECK_THROWS_AS(build_interval_mesh(0, 1.0), std::invalid_argument);
}

TEST_CASE("scatterer mesh with a radius-0 sentinel is a plain grid") {
  const Mesh m = build_scatterer_mesh(1.0, 0.5, 0.5, 0.0, 8);
  CHECK(m.n_nodes() == 81);
  CHECK(m.n_elements() == 2 * 8 * 8);
  CHECK(dirichlet_nodes(m).empty());
  CHECK(euler_number(m) == 1);
  for (const auto& b : m.boundary) CHECK(b.tag == BoundaryTag::impedance);
}

TEST_CASE("scatterer mesh snaps rim nodes onto the circle") {
  const double r = 0.25;
  const Mesh m = build_scatterer_mesh(1.0, 0.5, 0.5, r, 16);
  validate_mesh(m);
  CHECK(euler_number(m) == 0);  // one hole

  int rim_nodes = 0;
  for (const auto& b : m.boundary)
    if (b.tag == BoundaryTag::dirichlet)
      for (int k = 0; k < 2; ++k) {
        const double d = std::hypot(m.nodes(b.nodes[k], 0) - 0.5, m.nodes(b.nodes[k], 1) - 0.5);
        CHECK(std::abs(d - r) <= 1e-12);
        ++rim_nodes;
      }
  CHECK(rim_nodes > 0);
  for (Eigen::Index e = 0; e < m.n_elements(); ++e)
    CHECK(element_measure(m, static_cast<int>(e)) > 0.0);
}

TEST_CASE("default study resolution gives roughly 854 free unknowns") {
  const Mesh m = build_scatterer_mesh(1.0, 0.5, 0.5, 0.25, 32);
  const auto cons = dirichlet_nodes(m);
  const double free_dof = static_cast<double>(m.n_nodes() - static_cast<Eigen::Index>(cons.size()));
  CHECK(std::abs(free_dof - 854.0) <= 0.15 * 854.0);
}

TEST_CASE("scatterer parameter validation") {
  CHECK_THROWS_AS(build_scatterer_mesh(1.0, 0.5, 0.5, 0.6, 16), std::invalid_argument);
  CHECK_THROWS_AS(build_scatterer_mesh(1.0, 0.5, 0.5, 0.05, 8), std::invalid_argument);
  CHECK_THROWS_AS(build_scatterer_mesh(-1.0, 0.5, 0.5, 0.25, 16), std::invalid_argument);
}

TEST_CASE("mesh text round-trip is canonical") {
  const std::string text =
      "dim 2\n"
      "nodes 3\n"
      "0 0\n"
      "1 0\n"
      "0 1\n"
      "elements 1\n"
      "0 1 2\n"
      "boundary 3\n"
      "0 1 neumann_0\n"
      "1 2 impedance\n"
      "2 0 dirichlet\n";
  const Mesh m = parse_mesh(text);
  CHECK(m.n_nodes() == 3);
  CHECK(m.n_elements() == 1);
  const std::string canon = format_mesh(m);
  CHECK(format_mesh(parse_mesh(canon)) == canon);

  const Mesh big = build_scatterer_mesh(1.0, 0.5, 0.5, 0.25, 12);
  CHECK(format_mesh(parse_mesh(format_mesh(big))) == format_mesh(big));
}

TEST_CASE("untagged boundary entities are rejected by name") {
  const std::string missing_edge =
      "dim 2\n"
      "nodes 3\n"
      "0 0\n"
      "1 0\n"
      "0 1\n"
      "elements 1\n"
      "0 1 2\n"
      "boundary 2\n"
      "0 1 neumann_0\n"
      "1 2 impedance\n";
  CHECK_THROWS_WITH_AS(parse_mesh(missing_edge), "mesh: untagged boundary edge 0-2",
                       std::runtime_error);

  Mesh interval = build_interval_mesh(4, 1.0);
  interval.boundary.pop_back();
  CHECK_THROWS_WITH_AS(validate_mesh(interval), "mesh: untagged boundary node 4",
                       std::runtime_error);

  Mesh doubled = build_interval_mesh(4, 1.0);
  doubled.boundary.push_back(doubled.boundary[0]);
  CHECK_THROWS_AS(validate_mesh(doubled), std::runtime_error);

  Mesh interior = build_interval_mesh(4, 1.0);
  interior.boundary.push_back({{2, -1}, BoundaryTag::dirichlet});
  CHECK_THROWS_AS(validate_mesh(interior), std::runtime_error);
}

TEST_CASE("parse errors carry a description") {
  CHECK_THROWS_AS(parse_mesh("nodes 3\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_mesh("dim 3\nnodes 0\nelements 0\nboundary 0\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_mesh("dim 1\nnodes 2\n0\n1\nelements 1\n0 1\nboundary 2\n"
                             "0 neumann_g\n1 bogus\n"),
                  std::invalid_argument);
}

TEST_CASE("locate_point and interpolation rows") {
  const Mesh m = build_interval_mesh(10, 1.0);

  Matrix pts(3, 1);
  pts << 0.3, 0.25, 1.0;  // node, mid-element, right end
  const SparseMatrix P = interpolation_matrix(m, pts);
  REQUIRE(P.rows() == 3);
  REQUIRE(P.cols() == 11);

  const Matrix D = Matrix(P);
  CHECK(D(0, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(D.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(D(1, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(D(1, 3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(D(2, 10) == doctest::Approx(1.0).epsilon(1e-12));

  Vector bad(1);
  bad << 1.5;
  CHECK_THROWS_AS(locate_point(m, bad), std::runtime_error);
}

TEST_CASE("interpolation reproduces linear fields") {
  const Mesh m = build_scatterer_mesh(1.0, 0.5, 0.5, 0.25, 12);
  Matrix pts(5, 2);
  pts << 0.1, 0.1, 0.9, 0.2, 0.13, 0.77, 0.5, 0.05, 0.81, 0.86;
  const SparseMatrix P = interpolation_matrix(m, pts);

  Vector lin(m.n_nodes());
  for (Eigen::Index i = 0; i < m.n_nodes(); ++i)
    lin(i) = 0.7 + 1.3 * m.nodes(i, 0) - 0.4 * m.nodes(i, 1);
  const Vector at = P * lin;
  for (int i = 0; i < 5; ++i)
    CHECK(at(i) == doctest::Approx(0.7 + 1.3 * pts(i, 0) - 0.4 * pts(i, 1)).epsilon(1e-12));

  const Matrix D = Matrix(P);
  for (int i = 0; i < 5; ++i) CHECK(D.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("barycentric weights are clipped into the simplex") {
  const Mesh m = build_interval_mesh(4, 1.0);
  Vector x(1);
  x << 0.5;
  const PointLocation loc = locate_point(m, x);
  CHECK(loc.bary.minCoeff() >= 0.0);
  CHECK(loc.bary.sum() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(loc.element >= 0);
}

TEST_CASE("dirichlet node listing follows the tags") {
  const Mesh plain = build_interval_mesh(5, 1.0);
  CHECK(dirichlet_nodes(plain).empty());

  const Mesh fixed = build_interval_mesh(5, 1.0, BoundaryTag::dirichlet, BoundaryTag::neumann_0);
  const auto d = dirichlet_nodes(fixed);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == 0);

  const Mesh holed = build_scatterer_mesh(1.0, 0.5, 0.5, 0.25, 16);
  CHECK(!dirichlet_nodes(holed).empty());
}
