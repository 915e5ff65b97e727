#pragma once

#include <array>
#include <string>
#include <vector>

#include "statrom/linalg.hpp"

namespace statrom {

enum class BoundaryTag { dirichlet, neumann_g, neumann_0, impedance };

std::string to_string(BoundaryTag t);
BoundaryTag boundary_tag_from_string(const std::string& s);

/// Boundary entity: a node in 1d (nodes[1] = -1), an edge in 2d.
struct BoundaryEntity {
  std::array<int, 2> nodes{-1, -1};
  BoundaryTag tag = BoundaryTag::neumann_0;
};

/// Simplicial mesh: segments on an interval (dim 1) or triangles (dim 2).
/// elements has dim+1 columns; the trailing column is ignored in 1d.
struct Mesh {
  int dim = 1;
  Matrix nodes;              // n x dim coordinates
  Eigen::MatrixXi elements;  // m x (dim + 1) node indices
  std::vector<BoundaryEntity> boundary;

  Eigen::Index n_nodes() const { return nodes.rows(); }
  Eigen::Index n_elements() const { return elements.rows(); }
};

/// Uniform mesh of [0, length] with n_elements segments; the two endpoint
/// boundary entities get the given tags.
Mesh build_interval_mesh(int n_elements, double length,
                         BoundaryTag left = BoundaryTag::neumann_g,
                         BoundaryTag right = BoundaryTag::neumann_0);

/// Structured square mesh with a circular hole: an nx-by-nx grid of triangle
/// pairs on [0, side]^2, triangles whose centroid falls inside the circle are
/// removed, hole-boundary nodes are snapped radially onto the circle. The
/// hole boundary is tagged dirichlet, the outer square impedance. A radius of
/// zero means no hole (plain grid, all impedance). Throws if snapping
/// degenerates an element.
Mesh build_scatterer_mesh(double side, double cx, double cy, double radius, int nx);

/// Consistency checks (index ranges, positive measures, boundary entities on
/// the mesh). Throws with a description on the first violation.
void validate_mesh(const Mesh& mesh);

Mesh parse_mesh(const std::string& text);
std::string format_mesh(const Mesh& mesh);
Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

/// Element containing the point plus its barycentric coordinates there
/// (coordinates sum to one; entries beyond dim+1 are zero). Points within
/// tol of an element count as inside (negative weights clipped, weights
/// renormalized); otherwise throws. The default tol covers roundoff only;
/// pass a coarser one to evaluate across meshes whose curved boundaries were
/// snapped to slightly different polygons.
struct PointLocation {
  int element = -1;
  Eigen::Vector3d bary = Eigen::Vector3d::Zero();
};

PointLocation locate_point(const Mesh& mesh, const Vector& x, double tol = 1e-10);

/// Sparse interpolation operator: row i evaluates a nodal field at pts.row(i)
/// (rows sum to one, entries are barycentric weights).
SparseMatrix interpolation_matrix(const Mesh& mesh, const Matrix& pts, double tol = 1e-10);

std::vector<int> dirichlet_nodes(const Mesh& mesh);

double element_measure(const Mesh& mesh, int e);

}  // namespace statrom
