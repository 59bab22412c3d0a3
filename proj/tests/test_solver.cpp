#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "spbvem/error.hpp"
#include "spbvem/mesh_generators.hpp"
#include "spbvem/rng.hpp"
#include "spbvem/solver.hpp"
#include "spbvem/verification.hpp"

using namespace spbvem;

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SpMat random_sparse(int n, double fill, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0 + rng.uniform());
    for (int j = 0; j < n; ++j)
      if (j != i && rng.uniform() < fill) t.emplace_back(i, j, rng.uniform(-1.0, 1.0));
  }
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

}  // namespace

TEST(Solver, SingleElementSystemSize) {
  const Discretization d(generate_structured(Domain::UnitSquare, 1), 1);
  EXPECT_EQ(d.dofs().scalar_size(), 4);
  GlobalSystem sys = assemble_stokes(d, Coefficients{}, StabParams{}, Eigen::VectorXd::Zero(4));
  EXPECT_EQ(sys.A.rows(), 12);
  apply_zero_mean_pressure(d, sys);
  EXPECT_EQ(sys.A.rows(), 13);
  EXPECT_EQ(sys.n_multiplier, 1);
  // idempotent
  apply_zero_mean_pressure(d, sys);
  EXPECT_EQ(sys.A.rows(), 13);
}

TEST(Solver, MeanWeightsSumToArea) {
  for (int k = 1; k <= 3; ++k) {
    const Discretization sq(generate_nonconvex(3), k);
    EXPECT_NEAR(pressure_mean_weights(sq).sum(), 1.0, 1e-13);
    const Discretization ls(generate_voronoi(Domain::LShape, 4, 3, 1), k);
    EXPECT_NEAR(pressure_mean_weights(ls).sum(), 0.75, 1e-13);
  }
}

TEST(Solver, DirichletEliminationMatchesDenseSolve) {
  const int n = 12;
  const SpMat A = random_sparse(n, 0.3, 3);
  SplitMix64 rng(4);
  Eigen::VectorXd rhs(n), values = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) rhs[i] = rng.uniform(-1.0, 1.0);
  const std::vector<int> fixed{0, 5, 11};
  for (int c : fixed) values[c] = rng.uniform(-2.0, 2.0);

  // oracle: dense system with the fixed rows replaced by identity rows
  Eigen::MatrixXd M = Eigen::MatrixXd(A);
  Eigen::VectorXd b = rhs;
  for (int c : fixed) {
    M.row(c).setZero();
    M(c, c) = 1.0;
    b[c] = values[c];
  }
  const Eigen::VectorXd expect = M.fullPivLu().solve(b);

  const auto cs = apply_dirichlet(A, rhs, fixed, values);
  EXPECT_EQ(cs.A.rows(), n - 3);
  const Eigen::VectorXd got = cs.expand(linear_solve(cs.A, cs.rhs));
  EXPECT_LE((got - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Solver, IterativeAgreesWithDirect) {
  const SpMat A = random_sparse(40, 0.1, 5);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(40, -1.0, 1.0);
  const Eigen::VectorXd x1 = linear_solve(A, b, LinearSolverKind::Direct);
  const Eigen::VectorXd x2 = linear_solve(A, b, LinearSolverKind::Iterative);
  EXPECT_LE((x1 - x2).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Solver, SingularMatrixThrows) {
  SpMat A(3, 3);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = 1.0;
  EXPECT_THROW(linear_solve(A, Eigen::VectorXd::Ones(3)), SolverError);
}

TEST(Solver, ZeroMeanSolveMatchesBorderedSystem) {
  const Discretization d(generate_distorted_hex(3, 0.2, 1), 2);
  const int ns = d.dofs().scalar_size();
  Coefficients c = with_loads(Coefficients{}, example1_case(Domain::UnitSquare));
  GlobalSystem sys = assemble_stokes(d, c, StabParams{}, Eigen::VectorXd::Zero(ns));
  std::vector<int> fixed;
  for (int i = 0; i < ns; ++i)
    if (d.dofs().on_boundary(i)) {
      fixed.push_back(i);
      fixed.push_back(ns + i);
    }
  // non-zero boundary values so the multiplier is active
  Eigen::VectorXd values = Eigen::VectorXd::Zero(sys.A.rows());
  for (int i : fixed) values[i] = 0.1 * std::sin(1.0 + i);
  const auto cs = apply_dirichlet(sys.A, sys.rhs, fixed, values);
  const int nf = static_cast<int>(cs.free.size());
  const Eigen::VectorXd wp = pressure_mean_weights(d);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(nf), z = Eigen::VectorXd::Zero(nf);
  for (int i = 0; i < nf; ++i)
    if (cs.free[i] >= 2 * ns) {
      w[i] = wp[cs.free[i] - 2 * ns];
      z[i] = 1.0;  // k = 2: the only moment of a constant is the constant itself
    }
  const Eigen::VectorXd x = zero_mean_solve(cs.A, cs.rhs, w, z);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nf + 1, nf + 1);
  M.topLeftCorner(nf, nf) = Eigen::MatrixXd(cs.A);
  M.col(nf).head(nf) = w;
  M.row(nf).head(nf) = w.transpose();
  Eigen::VectorXd b(nf + 1);
  b << cs.rhs, 0.0;
  const Eigen::VectorXd ref = M.fullPivLu().solve(b).head(nf);
  EXPECT_LE((x - ref).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
  EXPECT_NEAR(w.dot(x), 0.0, 1e-12);
}

TEST(Solver, DirichletValuesNeedATrace) {
  const Discretization d(generate_structured(Domain::UnitSquare, 2), 1);
  EXPECT_THROW(dirichlet_values(d, {}), ValidationError);
}

TEST(Solver, ConfigValidation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.fixed_point_tol = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = SolverConfig{};
  cfg.max_outer = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = SolverConfig{};
  cfg.stab.c_tau = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Solver, NewtonTrivialAndLinearCases) {
  const Discretization d(generate_nonconvex(3), 1);
  const int ns = d.dofs().scalar_size();
  Coefficients c;
  c.g = [](Point2) { return 0.0; };
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(2 * ns);
  // zero data: psi = 0 after one step
  auto r = solve_pb_newton(d, c, u0, Eigen::VectorXd::Zero(ns), SolverConfig{}, {});
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE(r.psi.cwiseAbs().maxCoeff(), 1e-14);
  // alpha0 = 0 makes the problem linear: one step solves it
  c.alpha0 = 0.0;
  c.g = [](Point2 x) { return 1.0 + x.x; };
  r = solve_pb_newton(d, c, u0, Eigen::VectorXd::Zero(ns), SolverConfig{}, {});
  EXPECT_EQ(r.iterations, 1);
}

TEST(Solver, NewtonConvergesQuadratically) {
  const Discretization d(generate_distorted_hex(4, 0.2, 1), 1);
  const int ns = d.dofs().scalar_size();
  Coefficients c;
  c.alpha0 = 2.0;
  c.alpha1 = 3.0;
  c.g = [](Point2 x) { return 40.0 * std::sin(std::numbers::pi * x.x) * x.y; };
  SolverConfig cfg;
  cfg.newton_tol = 1e-13;
  auto r = solve_pb_newton(d, c, Eigen::VectorXd::Zero(2 * ns), Eigen::VectorXd::Zero(ns), cfg, {});
  ASSERT_GE(r.residuals.size(), 4u);
  // once in the asymptotic regime r_{n+1} <= C r_n^2
  bool quadratic = false;
  for (std::size_t i = 1; i + 1 < r.residuals.size(); ++i) {
    const double a = r.residuals[i], b = r.residuals[i + 1];
    if (a < 1e-2 && b > 1e-14 && b <= 10.0 * a * a) quadratic = true;
  }
  EXPECT_TRUE(quadratic);
  // Picard gets there too, just slower
  cfg.picard = true;
  cfg.max_newton = 200;
  auto p = solve_pb_newton(d, c, Eigen::VectorXd::Zero(2 * ns), Eigen::VectorXd::Zero(ns), cfg, {});
  EXPECT_GT(p.iterations, r.iterations);
  EXPECT_LE((p.psi - r.psi).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Solver, NewtonOverflowReportsBlowUp) {
  const Discretization d(generate_structured(Domain::UnitSquare, 3), 1);
  const int ns = d.dofs().scalar_size();
  Coefficients c;
  c.alpha1 = 800.0;
  c.g = [](Point2) { return 0.0; };
  EXPECT_THROW(solve_pb_newton(d, c, Eigen::VectorXd::Zero(2 * ns), Eigen::VectorXd::Zero(ns), SolverConfig{},
                               {{}, [](Point2) { return 2.0; }}),
               SolverError);
}

TEST(Solver, DecoupledDataConvergesImmediately) {
  // alpha0 = 0, E = 0, g = 0: the two problems do not talk to each other
  const Discretization d(generate_nonconvex(4), 1);
  Coefficients c;
  c.alpha0 = 0.0;
  c.E = {0.0, 0.0};
  c.f = [](Point2 x) { return Point2{x.y, -x.x}; };
  c.g = [](Point2) { return 0.0; };
  const auto st = coupled_fixed_point(d, c, SolverConfig{});
  EXPECT_LE(st.outer_iterations, 2);
  EXPECT_LE(st.psi.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Solver, OuterLoopHitsIterationCap) {
  const Discretization d(generate_structured(Domain::UnitSquare, 4), 1);
  Coefficients c = with_loads(Coefficients{}, example1_case(Domain::UnitSquare));
  SolverConfig cfg;
  cfg.max_outer = 1;
  cfg.fixed_point_tol = 1e-14;
  EXPECT_THROW(coupled_fixed_point(d, c, cfg, boundary_data(example1_case(Domain::UnitSquare))), SolverError);
}

TEST(Solver, PressureHasZeroMeanAfterSolve) {
  const auto mc = example1_case(Domain::LShape);
  const Discretization d(generate_voronoi(Domain::LShape, 4, 5, 1), 2);
  const auto st = coupled_fixed_point(d, with_loads(Coefficients{}, mc), SolverConfig{}, boundary_data(mc));
  EXPECT_LE(std::abs(pressure_mean(d, st.p)), 1e-10);
}
