#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "spbvem/mesh.hpp"
#include "spbvem/polyspace.hpp"

namespace spbvem {

enum class Field { U1 = 0, U2 = 1, P = 2, Psi = 3 };

/// Global numbering of the degrees of freedom of the order-k virtual element
/// space: vertex values, then the k-1 Gauss-Lobatto values per edge (by edge
/// id, ascending from the lower vertex id), then the scaled moments of
/// degree <= k-2 per element. The four scalar fields are blocked
/// u1 | u2 | p | psi with identical numbering inside each block.
class DofMap {
 public:
  DofMap() = default;
  DofMap(const PolygonalMesh& mesh, int k);

  int k() const { return k_; }
  int n_vertex() const { return n_vertex_; }
  int n_edge_internal() const { return k_ - 1; }
  int n_moments() const { return poly_dim(k_ - 2); }

  /// Scalar DOFs per field.
  int scalar_size() const { return scalar_size_; }
  int total_dofs() const { return 4 * scalar_size_; }
  int field_offset(Field f) const { return static_cast<int>(f) * scalar_size_; }

  /// Scalar global ids of the local DOFs of `cell` in local order
  /// (vertices, edge nodes edge by edge, moments).
  const std::vector<int>& cell_dofs(int cell) const { return cell_dofs_[cell]; }

  /// True for vertex and edge-node DOFs lying on a tagged boundary edge.
  bool on_boundary(int scalar_dof) const { return boundary_[scalar_dof] != 0; }

  /// Position of a nodal (vertex or edge) DOF; moments have no position.
  bool is_nodal(int scalar_dof) const { return scalar_dof < first_moment_; }
  Point2 node_position(int scalar_dof) const { return nodes_[scalar_dof]; }

  /// Closed-form count per scalar field: N_v + (k-1) N_e + N_E dim P_{k-2}.
  static int closed_form_scalar_count(const PolygonalMesh& mesh, int k);

 private:
  int k_ = 1;
  int n_vertex_ = 0;
  int scalar_size_ = 0;
  int first_moment_ = 0;
  std::vector<std::vector<int>> cell_dofs_;
  std::vector<char> boundary_;
  std::vector<Point2> nodes_;
};

DofMap build_dof_map(const PolygonalMesh& mesh, int k);

/// DOF vector of a scalar field: point values at vertices and edge nodes,
/// moments (1/|P|) int_P f m_a by quadrature.
Eigen::VectorXd interpolate_scalar(const PolygonalMesh& mesh, const DofMap& dofs,
                                   const std::function<double(Point2)>& field);

}  // namespace spbvem
