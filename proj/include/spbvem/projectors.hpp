#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "spbvem/mesh.hpp"
#include "spbvem/polyspace.hpp"

namespace spbvem {

/// Quadrature data of one element edge. The trace of a local function on the
/// edge is the degree-k Lagrange interpolant through `dofs` (start vertex,
/// interior Gauss-Lobatto nodes, end vertex).
struct EdgeTrace {
  double length = 0.0;
  Point2 normal;                  // outward unit normal
  std::vector<int> dofs;          // k+1 local DOF indices in parametric order
  std::vector<Point2> points;     // Gauss-Legendre points
  std::vector<double> weights;    // physical weights (sum = length)
  Eigen::MatrixXd lagrange;       // [points x (k+1)] trace basis values
};

/// Projection matrices of one element, acting on local DOF vectors.
///
/// Coefficient matrices map DOFs to monomial coefficients of the scaled basis.
/// `grad` holds the x and y components of the L2 projection of the gradient
/// onto P_{k-1}; `grad_k` the same onto P_k.
struct LocalProjectors {
  Eigen::MatrixXd G;      // energy Gram matrix with the boundary-mean row
  Eigen::MatrixXd B;      // right-hand side of the energy projection
  Eigen::MatrixXd D;      // DOFs of each monomial [n_dof x dim P_k]
  Eigen::MatrixXd H;      // monomial mass matrix on P_k
  Eigen::MatrixXd Pnab;   // [dim P_k x n_dof]
  Eigen::MatrixXd P0;     // [dim P_k x n_dof]
  std::array<Eigen::MatrixXd, 2> grad;    // [dim P_{k-1} x n_dof] each
  std::array<Eigen::MatrixXd, 2> grad_k;  // [dim P_k x n_dof] each
};

/// Everything element-local that the discrete forms need.
class ElementWorkspace {
 public:
  ElementWorkspace(const PolygonalMesh& mesh, int cell, int k, int quad_degree);

  int id() const { return id_; }
  int k() const { return k_; }
  int n_dofs() const { return n_dofs_; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_moments() const { return poly_dim(k_ - 2); }
  int first_moment() const { return n_dofs_ - n_moments(); }

  const std::vector<Point2>& vertices() const { return vertices_; }
  double area() const { return area_; }
  Point2 centroid() const { return centroid_; }
  double diameter() const { return diameter_; }
  const MonomialBasis& basis() const { return basis_; }
  const ElementQuadrature& quadrature() const { return quad_; }
  const std::vector<EdgeTrace>& edges() const { return edges_; }
  /// Positions of the nodal DOFs (vertices then edge nodes).
  const std::vector<Point2>& nodes() const { return nodes_; }

  const LocalProjectors& projectors() const { return proj_; }

  /// Monomial values [quad points x dim P_k] and derivatives.
  const Eigen::MatrixXd& mono() const { return mono_; }
  const Eigen::MatrixXd& mono_dx() const { return mono_dx_; }
  const Eigen::MatrixXd& mono_dy() const { return mono_dy_; }

  /// DOF vector of a polynomial given by its monomial coefficients.
  Eigen::VectorXd dofs_of_polynomial(const Eigen::VectorXd& coeffs) const { return proj_.D * coeffs; }

 private:
  int id_;
  int k_;
  int n_dofs_ = 0;
  std::vector<Point2> vertices_;
  double area_ = 0.0;
  Point2 centroid_;
  double diameter_ = 0.0;
  MonomialBasis basis_;
  ElementQuadrature quad_;
  std::vector<EdgeTrace> edges_;
  std::vector<Point2> nodes_;
  Eigen::MatrixXd mono_, mono_dx_, mono_dy_;
  LocalProjectors proj_;
};

/// Energy projector: G * coeffs = B * dofs, with the constant fixed by the
/// boundary mean int_dP (phi - Pi phi) = 0. Fills G, B and Pnab.
void compute_nabla_projector(const ElementWorkspace& ws, LocalProjectors& proj);

/// L2 projector on P_k in the enhanced space: moments up to degree k-2 come
/// from the DOFs, degree k-1 and k from the energy projection.
void compute_l2_projector(const ElementWorkspace& ws, LocalProjectors& proj);

/// L2 projection of the gradient onto [P_order]^2, order in {k-1, k}.
std::array<Eigen::MatrixXd, 2> compute_grad_l2_projector(const ElementWorkspace& ws, const LocalProjectors& proj,
                                                         int order);

/// Solves A X = R with partial pivoting; throws GeometryError naming the
/// element if A is numerically singular.
Eigen::MatrixXd solve_local(const Eigen::MatrixXd& A, const Eigen::MatrixXd& R, int element_id, const char* what);

}  // namespace spbvem
