#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spbvem/mesh_generators.hpp"
#include "spbvem/solver.hpp"

namespace spbvem {

/// Exact fields and the derivatives the loads and error norms need.
struct ManufacturedCase {
  std::string name;
  Domain domain = Domain::UnitSquare;
  double p0 = 0.0;
  std::function<Point2(Point2)> u;
  std::function<std::array<Point2, 2>(Point2)> grad_u;  // gradients of u_x and u_y
  std::function<Point2(Point2)> lap_u;
  std::function<double(Point2)> p;
  std::function<Point2(Point2)> grad_p;
  std::function<double(Point2)> psi;
  std::function<Point2(Point2)> grad_psi;
  std::function<double(Point2)> lap_psi;
};

/// Smooth solution built from xi = x^3 y^3 (1-x)^3 (1-y)^3, u = curl xi,
/// p = sin(pi x) cos(pi x) + p0, psi = x^2 y^2 (x-1)(y-1).
ManufacturedCase example1_case(Domain domain);

/// Polynomial solutions on the unit square for which every discrete form is
/// exact, so the discrete solution reproduces them.
///   "stokes":    u = curl of a degree k+1 polynomial, p of degree k-1, psi = 0
///   "potential": u = 0, p of degree k-1, psi of degree k
///   "coupled":   u constant, p and psi of degree k-1
ManufacturedCase patch_case(int k, const std::string& scenario);

/// Momentum and potential loads: f = -mu Lap u + grad p + eps Lap psi E,
/// g = -eps Lap psi + u . grad psi + kappa(psi).
struct Loads {
  std::function<Point2(Point2)> f;
  std::function<double(Point2)> g;
};
Loads derive_loads(const ManufacturedCase& mc, const Coefficients& coeffs);

/// Coefficients with the loads of `mc` attached.
Coefficients with_loads(Coefficients coeffs, const ManufacturedCase& mc);
BoundaryData boundary_data(const ManufacturedCase& mc);

struct ErrorNorms {
  double E_u = 0.0;
  double E_p = 0.0;
  double E_psi = 0.0;
};

/// Broken H1 errors of u and psi against Pi_nabla of the discrete fields and
/// the L2 error of p against Pi0 p_h, by quadrature of degree 2k+4.
ErrorNorms error_norms(const Discretization& disc, const SolutionState& st, const ManufacturedCase& mc);

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  ErrorNorms err;
  std::optional<double> rate_u, rate_p, rate_psi;
  int outer_iterations = 0;
  int newton_iterations = 0;  // total over the outer loop
  int n_cells = 0;
  int n_dofs = 0;
  double divergence = 0.0;  // || Pi0 div u_h ||
  double pressure_mean = 0.0;
  double seconds = 0.0;
  std::string failure;  // non-empty if this row did not solve
};

struct ConvergenceTable {
  int k = 1;
  std::vector<ConvergenceRow> rows;
};

/// log(e0/e1)/log(h0/h1); empty when either error is not positive.
std::optional<double> observed_rate(double e0, double e1, double h0, double h1);
/// Fills the rate columns from consecutive rows.
void convergence_rates(ConvergenceTable& table);

/// h, E^u, rate, E^p, rate, E^psi, rate, itr; scientific notation with six
/// significant digits, blank rates where undefined.
std::string to_csv(const ConvergenceTable& table);

enum class MeshFamily { Hex, NonConvex, Voronoi, Composite, Structured };
MeshFamily parse_family(const std::string& s);
std::string to_string(MeshFamily f);

struct FamilyParams {
  double distortion = 0.2;  // hex
  int lloyd_iters = 10;     // voronoi
  std::uint64_t seed = 1;
  int fine_ratio = 2;       // composite: right half uses fine_ratio * N
  double jitter = 0.0;      // nonconvex, composite: vertex shift relative to the shortest incident edge
};

/// Mesh of the family at resolution N (nominal h = 1/N).
PolygonalMesh family_mesh(MeshFamily family, Domain domain, int n, const FamilyParams& params = {});

struct StudyConfig {
  MeshFamily family = MeshFamily::Hex;
  Domain domain = Domain::UnitSquare;
  std::vector<int> n_values{5, 10, 20, 40};
  int k = 1;
  FamilyParams mesh;
  Coefficients coeffs;  // loads are derived from the manufactured case
  SolverConfig solver;
};

/// Example-1 data on each mesh of the family; a failing row is recorded and
/// the remaining rows still run.
ConvergenceTable run_convergence(const StudyConfig& cfg, const std::function<void(const ConvergenceRow&)>& progress = {});

}  // namespace spbvem
