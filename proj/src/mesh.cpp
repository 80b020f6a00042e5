#include "stpod/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stpod/errors.hpp"

namespace stpod::fem {

std::vector<int> Mesh::nodes_on(BoundaryKind kind) const {
  std::vector<int> out;
  for (const auto& e : edges) {
    if (e.kind == kind) {
      out.push_back(e.a);
      out.push_back(e.b);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Mesh make_quarter_mesh(int nx, int ny, double half_width, double half_height) {
  if (nx < 1 || ny < 1) throw InvalidArgumentError("mesh: element counts must be positive");
  if (!(half_width > 0.0) || !(half_height > 0.0)) {
    throw InvalidArgumentError("mesh: dimensions must be positive");
  }
  Mesh mesh;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.nodes.resize((nx + 1) * (ny + 1), 2);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.nodes(mesh.node_at(i, j), 0) = half_width * i / nx;
      mesh.nodes(mesh.node_at(i, j), 1) = half_height * j / ny;
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.elems.push_back({mesh.node_at(i, j), mesh.node_at(i + 1, j), mesh.node_at(i + 1, j + 1),
                            mesh.node_at(i, j + 1)});
    }
  }
  auto elem_at = [nx](int i, int j) { return j * nx + i; };
  for (int i = 0; i < nx; ++i) {
    mesh.edges.push_back({mesh.node_at(i, 0), mesh.node_at(i + 1, 0), elem_at(i, 0),
                          BoundaryKind::SymmetryY});
    mesh.edges.push_back({mesh.node_at(i + 1, ny), mesh.node_at(i, ny), elem_at(i, ny - 1),
                          BoundaryKind::Contact});
  }
  for (int j = 0; j < ny; ++j) {
    mesh.edges.push_back({mesh.node_at(nx, j), mesh.node_at(nx, j + 1), elem_at(nx - 1, j),
                          BoundaryKind::Free});
    mesh.edges.push_back({mesh.node_at(0, j + 1), mesh.node_at(0, j), elem_at(0, j),
                          BoundaryKind::SymmetryX});
  }
  return mesh;
}

ShapeEval shape_functions(double xi, double eta) {
  static constexpr std::array<double, 4> xs{-1.0, 1.0, 1.0, -1.0};
  static constexpr std::array<double, 4> es{-1.0, -1.0, 1.0, 1.0};
  ShapeEval s;
  for (int a = 0; a < 4; ++a) {
    s.n(a) = 0.25 * (1.0 + xs[a] * xi) * (1.0 + es[a] * eta);
    s.dn(0, a) = 0.25 * xs[a] * (1.0 + es[a] * eta);
    s.dn(1, a) = 0.25 * es[a] * (1.0 + xs[a] * xi);
  }
  return s;
}

const std::array<Eigen::Vector2d, 4>& gauss_points_2x2() {
  static const double g = 1.0 / std::sqrt(3.0);
  static const std::array<Eigen::Vector2d, 4> pts{Eigen::Vector2d(-g, -g), Eigen::Vector2d(g, -g),
                                                  Eigen::Vector2d(g, g), Eigen::Vector2d(-g, g)};
  return pts;
}

Eigen::Matrix<double, 4, 2> element_coords(const Mesh& mesh, const Coords& coords, int e) {
  Eigen::Matrix<double, 4, 2> x;
  for (int a = 0; a < 4; ++a) x.row(a) = coords.row(mesh.elems[e][a]);
  return x;
}

void check_jacobians(const Mesh& mesh, const Coords& coords) {
  for (int e = 0; e < mesh.num_elems(); ++e) {
    const auto x = element_coords(mesh, coords, e);
    auto check = [&](double xi, double eta) {
      const ShapeEval s = shape_functions(xi, eta);
      const double det = (s.dn * x).determinant();
      if (!(det > 0.0)) {
        throw DegenerateElementError("element " + std::to_string(e) +
                                         " has non-positive Jacobian determinant " +
                                         std::to_string(det),
                                     e);
      }
    };
    for (const auto& gp : gauss_points_2x2()) check(gp(0), gp(1));
    check(0.0, 0.0);
  }
}

}  // namespace stpod::fem
