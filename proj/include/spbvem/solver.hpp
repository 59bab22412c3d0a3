#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "spbvem/dofmap.hpp"
#include "spbvem/forms.hpp"

namespace spbvem {

/// Mesh, DOF numbering and the per-element projection data, built once.
class Discretization {
 public:
  Discretization(PolygonalMesh mesh, int k);

  const PolygonalMesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  int k() const { return dofs_.k(); }
  const std::vector<ElementForms>& elements() const { return elements_; }
  /// Scalar DOFs of one field on the element (local order).
  Eigen::VectorXd gather(int cell, const Eigen::VectorXd& scalar_field) const;
  /// Both velocity components, [x | y], from a 2 * scalar_size vector.
  Eigen::VectorXd gather_vector(int cell, const Eigen::VectorXd& velocity) const;

 private:
  PolygonalMesh mesh_;
  DofMap dofs_;
  std::vector<ElementForms> elements_;
};

enum class LinearSolverKind { Direct, Iterative };

struct SolverConfig {
  double fixed_point_tol = 1e-6;
  int max_outer = 50;
  double newton_tol = 1e-10;
  int max_newton = 30;
  LinearSolverKind linear_solver = LinearSolverKind::Direct;
  bool picard = false;  // frozen-slope iteration instead of Newton for the potential
  StabParams stab;

  void validate() const;
};

/// Assembled sparse system. Unknowns are ordered u_x | u_y | p, followed by
/// the pressure multiplier once the zero-mean constraint has been added.
struct GlobalSystem {
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  Eigen::VectorXd rhs;
  int n_velocity = 0;
  int n_pressure = 0;
  int n_multiplier = 0;
};

/// System restricted to the free unknowns after eliminating Dirichlet values.
struct ConstrainedSystem {
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  Eigen::VectorXd rhs;
  std::vector<int> free;     // full index of each reduced unknown
  Eigen::VectorXd values;    // prescribed values at constrained entries, zero elsewhere

  /// Full solution vector from a reduced one.
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
};

/// Boundary traces; empty callables mean homogeneous data.
struct BoundaryData {
  std::function<Point2(Point2)> velocity;
  std::function<double(Point2)> potential;
};

struct SolutionState {
  Eigen::VectorXd u;    // [x | y], 2 * scalar_size
  Eigen::VectorXd p;
  Eigen::VectorXd psi;
  int outer_iterations = 0;
  std::vector<int> newton_iterations;   // per outer iteration
  std::vector<double> residual_history; // combined increment per outer iteration
};

GlobalSystem assemble_stokes(const Discretization& disc, const Coefficients& coeffs, const StabParams& stab,
                             const Eigen::VectorXd& psi, bool with_coupling = true);

/// Adds the multiplier row/column w_i = int Pi0 phi_i for the pressure DOFs.
void apply_zero_mean_pressure(const Discretization& disc, GlobalSystem& sys);
/// Pressure weights w_i.
Eigen::VectorXd pressure_mean_weights(const Discretization& disc);

/// Row and column elimination of the entries in `constrained` with the given
/// values; the right-hand side is lifted accordingly.
ConstrainedSystem apply_dirichlet(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A, const Eigen::VectorXd& rhs,
                                  const std::vector<int>& constrained, const Eigen::VectorXd& values);

/// Boundary DOF values of a scalar field, interpolated at the nodes. Throws
/// ValidationError if the callable is empty.
std::vector<std::pair<int, double>> dirichlet_values(const Discretization& disc,
                                                     const std::function<double(Point2)>& trace);

/// Sparse LU (KLU when available) or preconditioned BiCGSTAB; throws
/// SolverError on a singular matrix or a residual above 1e-9 relative.
Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A, const Eigen::VectorXd& rhs,
                             LinearSolverKind kind = LinearSolverKind::Direct);

/// Solves A x + lambda w = rhs, w^T x = 0 for an operator with the one
/// dimensional kernel z on both sides (constant pressures). A redundant row
/// is pinned so the factorization stays sparse; falls back to the explicit
/// bordered system if the pinned solve does not satisfy the full residual.
Eigen::VectorXd zero_mean_solve(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A, const Eigen::VectorXd& rhs,
                                const Eigen::VectorXd& w, const Eigen::VectorXd& z,
                                LinearSolverKind kind = LinearSolverKind::Direct);

/// Name of the sparse direct backend compiled in.
const char* direct_solver_name();

struct StokesSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd p;
};

/// One linear Stokes solve with psi frozen.
StokesSolution solve_stokes(const Discretization& disc, const Coefficients& coeffs, const SolverConfig& cfg,
                            const BoundaryData& bc, const Eigen::VectorXd& psi);

struct PbResult {
  Eigen::VectorXd psi;
  int iterations = 0;
  std::vector<double> residuals;
};

/// Newton iteration for the potential with the velocity frozen.
PbResult solve_pb_newton(const Discretization& disc, const Coefficients& coeffs, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& psi_init, const SolverConfig& cfg, const BoundaryData& bc);

/// Outer fixed-point loop: Stokes with psi frozen, then the potential with
/// u frozen, until both increments fall below fixed_point_tol.
SolutionState coupled_fixed_point(const Discretization& disc, const Coefficients& coeffs, const SolverConfig& cfg,
                                  const BoundaryData& bc = {});

/// sqrt(sum_E int |Pi0_{k-1} grad v|^2) for a scalar DOF vector.
double broken_h1_seminorm(const Discretization& disc, const Eigen::VectorXd& v);
/// int Pi0_k p over the domain.
double pressure_mean(const Discretization& disc, const Eigen::VectorXd& p);
/// || Pi0_{k-1} div u_h ||_{L2}.
double divergence_norm(const Discretization& disc, const Eigen::VectorXd& u);

}  // namespace spbvem
