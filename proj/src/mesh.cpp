#include "statrom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace statrom {

std::string to_string(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::dirichlet: return "dirichlet";
    case BoundaryTag::neumann_g: return "neumann_g";
    case BoundaryTag::neumann_0: return "neumann_0";
    case BoundaryTag::impedance: return "impedance";
  }
  throw std::logic_error("unknown boundary tag");
}

BoundaryTag boundary_tag_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryTag::dirichlet;
  if (s == "neumann_g") return BoundaryTag::neumann_g;
  if (s == "neumann_0") return BoundaryTag::neumann_0;
  if (s == "impedance") return BoundaryTag::impedance;
  throw std::invalid_argument("unknown boundary tag: " + s);
}

Mesh build_interval_mesh(int n_elements, double length, BoundaryTag left, BoundaryTag right) {
  if (n_elements < 1 || length <= 0)
    throw std::invalid_argument("build_interval_mesh: need n >= 1, length > 0");
  Mesh m;
  m.dim = 1;
  m.nodes.resize(n_elements + 1, 1);
  for (int i = 0; i <= n_elements; ++i) m.nodes(i, 0) = length * i / n_elements;
  m.elements.resize(n_elements, 2);
  for (int e = 0; e < n_elements; ++e) {
    m.elements(e, 0) = e;
    m.elements(e, 1) = e + 1;
  }
  m.boundary.push_back({{0, -1}, left});
  m.boundary.push_back({{n_elements, -1}, right});
  validate_mesh(m);
  return m;
}

Mesh build_scatterer_mesh(double side, double cx, double cy, double radius, int nx) {
  if (side <= 0 || radius < 0 || nx < 4)
    throw std::invalid_argument("build_scatterer_mesh: bad parameters");
  // radius 0 is the no-hole sentinel: a plain square grid, all impedance
  if (radius > 0) {
    if (cx - radius <= 0 || cx + radius >= side || cy - radius <= 0 || cy + radius >= side)
      throw std::invalid_argument("build_scatterer_mesh: circle not strictly inside the square");
    if (side / nx >= radius)
      throw std::invalid_argument("build_scatterer_mesh: grid too coarse for the circle");
  }
  const int nn = nx + 1;
  const double h = side / nx;
  auto nid = [&](int i, int j) { return j * nn + i; };

  Matrix nodes(nn * nn, 2);
  for (int j = 0; j < nn; ++j)
    for (int i = 0; i < nn; ++i) {
      nodes(nid(i, j), 0) = i * h;
      nodes(nid(i, j), 1) = j * h;
    }

  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < nx; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = nid(i, j), b = nid(i + 1, j), c = nid(i + 1, j + 1), d = nid(i, j + 1);
      // alternate the diagonal to avoid a preferred direction
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }

  auto inside = [&](double x, double y) {
    const double dx = x - cx, dy = y - cy;
    return dx * dx + dy * dy < radius * radius;
  };

  std::vector<std::array<int, 3>> kept;
  for (const auto& t : tris) {
    const double gx = (nodes(t[0], 0) + nodes(t[1], 0) + nodes(t[2], 0)) / 3.0;
    const double gy = (nodes(t[0], 1) + nodes(t[1], 1) + nodes(t[2], 1)) / 3.0;
    if (!inside(gx, gy)) kept.push_back(t);
  }
  if (kept.empty()) throw std::runtime_error("build_scatterer_mesh: circle swallows the mesh");

  // boundary edges appear in exactly one kept triangle
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : kept)
    for (int k = 0; k < 3; ++k) {
      int u = t[k], v = t[(k + 1) % 3];
      if (u > v) std::swap(u, v);
      edge_count[{u, v}]++;
    }

  const double tol = 1e-9 * side;
  auto on_square = [&](int n) {
    const double x = nodes(n, 0), y = nodes(n, 1);
    return x < tol || x > side - tol || y < tol || y > side - tol;
  };

  std::vector<std::pair<std::pair<int, int>, BoundaryTag>> bedges;
  std::set<int> hole_nodes;
  for (const auto& [e, cnt] : edge_count) {
    if (cnt != 1) continue;
    if (on_square(e.first) && on_square(e.second)) {
      bedges.push_back({e, BoundaryTag::impedance});
    } else {
      bedges.push_back({e, BoundaryTag::dirichlet});
      hole_nodes.insert(e.first);
      hole_nodes.insert(e.second);
    }
  }

  // snap hole nodes radially onto the circle
  for (int n : hole_nodes) {
    const double dx = nodes(n, 0) - cx, dy = nodes(n, 1) - cy;
    const double r = std::hypot(dx, dy);
    if (r < 1e-12) throw std::runtime_error("build_scatterer_mesh: node at circle center");
    nodes(n, 0) = cx + dx * radius / r;
    nodes(n, 1) = cy + dy * radius / r;
  }

  // drop orphan nodes, renumber
  std::vector<int> remap(nodes.rows(), -1);
  int nkept = 0;
  for (const auto& t : kept)
    for (int k = 0; k < 3; ++k)
      if (remap[t[k]] < 0) remap[t[k]] = nkept++;

  Mesh m;
  m.dim = 2;
  m.nodes.resize(nkept, 2);
  for (Eigen::Index n = 0; n < nodes.rows(); ++n)
    if (remap[n] >= 0) m.nodes.row(remap[n]) = nodes.row(n);
  m.elements.resize(static_cast<Eigen::Index>(kept.size()), 3);
  for (std::size_t t = 0; t < kept.size(); ++t)
    for (int k = 0; k < 3; ++k) m.elements(static_cast<Eigen::Index>(t), k) = remap[kept[t][k]];
  for (const auto& [e, tag] : bedges)
    m.boundary.push_back({{remap[e.first], remap[e.second]}, tag});

  // snapping can flip a sliver; validate_mesh rejects that configuration
  validate_mesh(m);
  const double amin = 1e-6 * h * h;
  for (Eigen::Index e = 0; e < m.n_elements(); ++e)
    if (element_measure(m, static_cast<int>(e)) < amin)
      throw std::runtime_error("build_scatterer_mesh: degenerate element after snapping");
  return m;
}

double element_measure(const Mesh& mesh, int e) {
  if (mesh.dim == 1) {
    return std::abs(mesh.nodes(mesh.elements(e, 1), 0) - mesh.nodes(mesh.elements(e, 0), 0));
  }
  const auto a = mesh.nodes.row(mesh.elements(e, 0));
  const auto b = mesh.nodes.row(mesh.elements(e, 1));
  const auto c = mesh.nodes.row(mesh.elements(e, 2));
  return 0.5 * std::abs((b(0) - a(0)) * (c(1) - a(1)) - (c(0) - a(0)) * (b(1) - a(1)));
}

void validate_mesh(const Mesh& mesh) {
  if (mesh.dim != 1 && mesh.dim != 2) throw std::runtime_error("mesh: dim must be 1 or 2");
  if (mesh.nodes.cols() != mesh.dim) throw std::runtime_error("mesh: node coordinate width");
  if (mesh.elements.cols() < mesh.dim + 1) throw std::runtime_error("mesh: element width");
  const int n = static_cast<int>(mesh.n_nodes());
  for (Eigen::Index e = 0; e < mesh.n_elements(); ++e) {
    for (int k = 0; k <= mesh.dim; ++k) {
      const int v = mesh.elements(e, k);
      if (v < 0 || v >= n) throw std::runtime_error("mesh: element node out of range");
    }
    if (element_measure(mesh, static_cast<int>(e)) <= 0.0)
      throw std::runtime_error("mesh: element with non-positive measure");
  }
  for (const auto& b : mesh.boundary) {
    if (b.nodes[0] < 0 || b.nodes[0] >= n) throw std::runtime_error("mesh: boundary node range");
    if (mesh.dim == 2 && (b.nodes[1] < 0 || b.nodes[1] >= n))
      throw std::runtime_error("mesh: boundary edge node range");
    if (mesh.dim == 1 && b.nodes[1] != -1)
      throw std::runtime_error("mesh: 1d boundary entity must be a single node");
  }

  // every geometric boundary entity (endpoint node in 1d, single-triangle
  // edge in 2d) must carry exactly one tag, and nothing else may be tagged
  std::map<std::pair<int, int>, int> adjacency;
  if (mesh.dim == 1) {
    for (Eigen::Index e = 0; e < mesh.n_elements(); ++e) {
      adjacency[{mesh.elements(e, 0), -1}]++;
      adjacency[{mesh.elements(e, 1), -1}]++;
    }
  } else {
    for (Eigen::Index e = 0; e < mesh.n_elements(); ++e)
      for (int k = 0; k < 3; ++k) {
        int u = mesh.elements(e, k), v = mesh.elements(e, (k + 1) % 3);
        if (u > v) std::swap(u, v);
        adjacency[{u, v}]++;
      }
  }
  auto entity_name = [&](const std::pair<int, int>& e) {
    std::ostringstream s;
    s << (mesh.dim == 1 ? "node " : "edge ") << e.first;
    if (mesh.dim == 2) s << "-" << e.second;
    return s.str();
  };
  std::map<std::pair<int, int>, int> tagged;
  for (const auto& b : mesh.boundary) {
    std::pair<int, int> key{b.nodes[0], b.nodes[1]};
    if (mesh.dim == 2 && key.first > key.second) std::swap(key.first, key.second);
    if (++tagged[key] > 1)
      throw std::runtime_error("mesh: " + entity_name(key) + " tagged more than once");
    const auto it = adjacency.find(key);
    if (it == adjacency.end() || it->second != 1)
      throw std::runtime_error("mesh: tagged " + entity_name(key) + " is not on the boundary");
  }
  for (const auto& [e, cnt] : adjacency)
    if (cnt == 1 && !tagged.count(e))
      throw std::runtime_error("mesh: untagged boundary " + entity_name(e));
}

Mesh parse_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  Mesh m;
  if (!(in >> tok) || tok != "dim") throw std::runtime_error("mesh parse: expected 'dim'");
  in >> m.dim;
  if (m.dim != 1 && m.dim != 2) throw std::runtime_error("mesh parse: dim must be 1 or 2");
  Eigen::Index nn = 0, ne = 0;
  if (!(in >> tok) || tok != "nodes") throw std::runtime_error("mesh parse: expected 'nodes'");
  in >> nn;
  m.nodes.resize(nn, m.dim);
  for (Eigen::Index i = 0; i < nn; ++i)
    for (int d = 0; d < m.dim; ++d)
      if (!(in >> m.nodes(i, d))) throw std::runtime_error("mesh parse: node coordinates");
  if (!(in >> tok) || tok != "elements")
    throw std::runtime_error("mesh parse: expected 'elements'");
  in >> ne;
  m.elements.resize(ne, m.dim + 1);
  for (Eigen::Index e = 0; e < ne; ++e)
    for (int k = 0; k <= m.dim; ++k)
      if (!(in >> m.elements(e, k))) throw std::runtime_error("mesh parse: element indices");
  if (!(in >> tok) || tok != "boundary")
    throw std::runtime_error("mesh parse: expected 'boundary'");
  Eigen::Index nb = 0;
  in >> nb;
  for (Eigen::Index b = 0; b < nb; ++b) {
    BoundaryEntity be;
    if (!(in >> be.nodes[0])) throw std::runtime_error("mesh parse: boundary entity");
    if (m.dim == 2 && !(in >> be.nodes[1]))
      throw std::runtime_error("mesh parse: boundary entity");
    std::string tag;
    if (!(in >> tag)) throw std::runtime_error("mesh parse: boundary tag");
    be.tag = boundary_tag_from_string(tag);
    m.boundary.push_back(be);
  }
  validate_mesh(m);
  return m;
}

std::string format_mesh(const Mesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  out << "dim " << mesh.dim << "\n";
  out << "nodes " << mesh.n_nodes() << "\n";
  for (Eigen::Index i = 0; i < mesh.n_nodes(); ++i) {
    for (int d = 0; d < mesh.dim; ++d) out << (d ? " " : "") << mesh.nodes(i, d);
    out << "\n";
  }
  out << "elements " << mesh.n_elements() << "\n";
  for (Eigen::Index e = 0; e < mesh.n_elements(); ++e) {
    for (int k = 0; k <= mesh.dim; ++k) out << (k ? " " : "") << mesh.elements(e, k);
    out << "\n";
  }
  out << "boundary " << mesh.boundary.size() << "\n";
  for (const auto& b : mesh.boundary) {
    out << b.nodes[0];
    if (mesh.dim == 2) out << " " << b.nodes[1];
    out << " " << to_string(b.tag) << "\n";
  }
  return out.str();
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_mesh: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str());
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_mesh: cannot open " + path);
  out << format_mesh(mesh);
}

PointLocation locate_point(const Mesh& mesh, const Vector& x, double tol) {
  if (x.size() != mesh.dim) throw std::invalid_argument("locate_point: dimension mismatch");
  PointLocation best;
  double best_violation = std::numeric_limits<double>::max();
  for (Eigen::Index e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Vector3d lam = Eigen::Vector3d::Zero();
    if (mesh.dim == 1) {
      const double a = mesh.nodes(mesh.elements(e, 0), 0);
      const double b = mesh.nodes(mesh.elements(e, 1), 0);
      const double t = (x(0) - a) / (b - a);
      lam(0) = 1.0 - t;
      lam(1) = t;
    } else {
      const auto a = mesh.nodes.row(mesh.elements(e, 0));
      const auto b = mesh.nodes.row(mesh.elements(e, 1));
      const auto c = mesh.nodes.row(mesh.elements(e, 2));
      const double det = (b(0) - a(0)) * (c(1) - a(1)) - (c(0) - a(0)) * (b(1) - a(1));
      lam(1) = ((x(0) - a(0)) * (c(1) - a(1)) - (c(0) - a(0)) * (x(1) - a(1))) / det;
      lam(2) = ((b(0) - a(0)) * (x(1) - a(1)) - (x(0) - a(0)) * (b(1) - a(1))) / det;
      lam(0) = 1.0 - lam(1) - lam(2);
    }
    const double violation = -lam.minCoeff();
    if (violation < best_violation) {
      best_violation = violation;
      best.element = static_cast<int>(e);
      best.bary = lam;
    }
    if (violation <= 0.0) break;  // strictly inside; cannot improve
  }
  if (best_violation <= tol) {
    // clip tiny negative weights and renormalize so rows still sum to one
    for (int k = 0; k < 3; ++k) best.bary(k) = std::max(best.bary(k), 0.0);
    best.bary /= best.bary.sum();
    return best;
  }
  std::ostringstream msg;
  msg << "locate_point: point (" << x.transpose() << ") outside mesh (closest violation "
      << best_violation << ")";
  throw std::runtime_error(msg.str());
}

SparseMatrix interpolation_matrix(const Mesh& mesh, const Matrix& pts, double tol) {
  if (pts.cols() != mesh.dim)
    throw std::invalid_argument("interpolation_matrix: dimension mismatch");
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index p = 0; p < pts.rows(); ++p) {
    const PointLocation loc = locate_point(mesh, pts.row(p).transpose(), tol);
    for (int k = 0; k <= mesh.dim; ++k)
      trip.emplace_back(static_cast<int>(p), mesh.elements(loc.element, k), loc.bary(k));
  }
  SparseMatrix P(pts.rows(), mesh.n_nodes());
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

std::vector<int> dirichlet_nodes(const Mesh& mesh) {
  std::set<int> s;
  for (const auto& b : mesh.boundary)
    if (b.tag == BoundaryTag::dirichlet) {
      s.insert(b.nodes[0]);
      if (mesh.dim == 2) s.insert(b.nodes[1]);
    }
  return std::vector<int>(s.begin(), s.end());
}

}  // namespace statrom
