#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace stpod::fem {

using Coords = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Parts of the boundary. Symmetry edges carry a prescribed normal velocity,
/// free edges are traction free, contact edges touch the die.
enum class BoundaryKind { SymmetryX, SymmetryY, Free, Contact };

struct BoundaryEdge {
  int a = 0;  // node indices, ordered counter-clockwise around the body
  int b = 0;
  int element = 0;
  BoundaryKind kind = BoundaryKind::Free;
};

/// Structured mesh of bilinear quadrilaterals.
struct Mesh {
  Coords nodes;                            // reference coordinates (mm)
  std::vector<std::array<int, 4>> elems;   // counter-clockwise node lists
  std::vector<BoundaryEdge> edges;         // disjoint cover of the boundary
  int nx = 0;
  int ny = 0;

  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_elems() const { return static_cast<int>(elems.size()); }
  int node_at(int i, int j) const { return j * (nx + 1) + i; }

  /// Sorted, unique node indices touching edges of the given kind.
  std::vector<int> nodes_on(BoundaryKind kind) const;
};

/// Quarter model [0, half_width] x [0, half_height] with nx x ny elements:
/// symmetry planes x = 0 and y = 0, die contact on y = half_height, free
/// lateral surface on x = half_width.
Mesh make_quarter_mesh(int nx, int ny, double half_width, double half_height);

/// Bilinear shape functions and their parent derivatives at (xi, eta).
struct ShapeEval {
  Eigen::Vector4d n;
  Eigen::Matrix<double, 2, 4> dn;  // rows: d/dxi, d/deta
};
ShapeEval shape_functions(double xi, double eta);

/// 2 x 2 Gauss rule on [-1, 1]^2 (unit weights).
const std::array<Eigen::Vector2d, 4>& gauss_points_2x2();

/// Element nodal coordinates (4 x 2).
Eigen::Matrix<double, 4, 2> element_coords(const Mesh& mesh, const Coords& coords, int e);

/// Throws DegenerateElementError if any element has a non-positive Jacobian
/// determinant at a 2 x 2 Gauss point or at its centroid.
void check_jacobians(const Mesh& mesh, const Coords& coords);

}  // namespace stpod::fem
