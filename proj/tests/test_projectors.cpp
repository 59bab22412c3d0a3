#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "spbvem/error.hpp"
#include "spbvem/mesh_generators.hpp"
#include "spbvem/projectors.hpp"
#include "spbvem/rng.hpp"

using namespace spbvem;

namespace {

std::vector<PolygonalMesh> all_families() {
  return {generate_structured(Domain::UnitSquare, 3), generate_distorted_hex(4, 0.2, 5), generate_nonconvex(3),
          generate_voronoi(Domain::LShape, 6, 3, 2), generate_composite_hanging(2, 4)};
}

std::vector<double> lobatto_params(int k) {
  // closed forms for the orders exercised here
  if (k == 1) return {0.0, 1.0};
  if (k == 2) return {0.0, 0.5, 1.0};
  const double s = 1.0 / std::sqrt(5.0);
  return {0.0, (1 - s) / 2, (1 + s) / 2, 1.0};
}

std::vector<std::array<int, 2>> exponents(int deg) {
  std::vector<std::array<int, 2>> e;
  for (int d = 0; d <= deg; ++d)
    for (int a = d; a >= 0; --a) e.push_back({a, d - a});
  return e;
}

/// Re-derives the projections of one local DOF vector straight from their
/// defining relations, using exact polygon integrals of monomials.
struct OracleProjections {
  Eigen::VectorXd nabla, l2, gx, gy;  // coefficients in the scaled basis
};

OracleProjections oracle_projections(const std::vector<Point2>& pts, int k, const Eigen::VectorXd& phi) {
  const int nv = static_cast<int>(pts.size());
  const double area = oracle::monomial_integral(pts, {0, 0}, 1.0, 0, 0);
  const Point2 c{oracle::monomial_integral(pts, {0, 0}, 1.0, 1, 0) / area,
                 oracle::monomial_integral(pts, {0, 0}, 1.0, 0, 1) / area};
  double h = 0.0;
  for (auto& p : pts)
    for (auto& q : pts) h = std::max(h, distance(p, q));
  const auto ex = exponents(k);
  const int dim = static_cast<int>(ex.size());
  const int nlow = k >= 2 ? static_cast<int>(exponents(k - 2).size()) : 0;
  auto I = [&](int a, int b) { return a < 0 || b < 0 ? 0.0 : oracle::monomial_integral(pts, c, h, a, b); };
  auto mval = [&](int i, Point2 x) { return std::pow((x.x - c.x) / h, ex[i][0]) * std::pow((x.y - c.y) / h, ex[i][1]); };

  // boundary integrals of phi * f for a callable f
  const auto tn = lobatto_params(k);
  std::vector<double> gx, gw;
  oracle::golub_welsch(k + 4, gx, gw);
  auto boundary = [&](auto&& f) {
    double s = 0.0;
    for (int i = 0; i < nv; ++i) {
      const Point2 a = pts[i], b = pts[(i + 1) % nv];
      const double len = distance(a, b);
      const Point2 n{(b.y - a.y) / len, -(b.x - a.x) / len};
      std::vector<double> vals{phi[i]};
      for (int j = 0; j < k - 1; ++j) vals.push_back(phi[nv + i * (k - 1) + j]);
      vals.push_back(phi[(i + 1) % nv]);
      for (std::size_t g = 0; g < gx.size(); ++g) {
        double tr = 0.0;
        for (int j = 0; j <= k; ++j) {
          double l = 1.0;
          for (int m = 0; m <= k; ++m)
            if (m != j) l *= (gx[g] - tn[m]) / (tn[j] - tn[m]);
          tr += vals[j] * l;
        }
        s += gw[g] * len * tr * f(a + gx[g] * (b - a), n);
      }
    }
    return s;
  };
  auto moment = [&](int a, int b) {  // int phi X^a Y^b for a+b <= k-2
    for (int i = 0; i < nlow; ++i)
      if (ex[i][0] == a && ex[i][1] == b) return area * phi[nv * k + i];
    return 0.0;
  };

  OracleProjections out;
  Eigen::MatrixXd G(dim, dim);
  Eigen::VectorXd rhs(dim);
  for (int i = 0; i < dim; ++i) {
    const auto [a1, b1] = ex[i];
    for (int j = 0; j < dim; ++j) {
      const auto [a2, b2] = ex[j];
      G(i, j) = (a1 * a2 * I(a1 + a2 - 2, b1 + b2) + b1 * b2 * I(a1 + a2, b1 + b2 - 2)) / (h * h);
    }
    rhs[i] = boundary([&](Point2 x, Point2 n) {
      const double X = (x.x - c.x) / h, Y = (x.y - c.y) / h;
      const double dx = a1 ? a1 * std::pow(X, a1 - 1) * std::pow(Y, b1) / h : 0.0;
      const double dy = b1 ? b1 * std::pow(X, a1) * std::pow(Y, b1 - 1) / h : 0.0;
      return dx * n.x + dy * n.y;
    });
    rhs[i] -= (a1 * (a1 - 1) * moment(a1 - 2, b1) + b1 * (b1 - 1) * moment(a1, b1 - 2)) / (h * h);
  }
  for (int j = 0; j < dim; ++j) {
    G(0, j) = boundary([&](Point2, Point2) { return 0.0; });  // placeholder, replaced below
    double s = 0.0;
    for (int i = 0; i < nv; ++i) {
      const Point2 a = pts[i], b = pts[(i + 1) % nv];
      for (std::size_t g = 0; g < gx.size(); ++g) s += gw[g] * distance(a, b) * mval(j, a + gx[g] * (b - a));
    }
    G(0, j) = s;
  }
  rhs[0] = boundary([](Point2, Point2) { return 1.0; });
  out.nabla = G.fullPivLu().solve(rhs);

  Eigen::MatrixXd H(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) H(i, j) = I(ex[i][0] + ex[j][0], ex[i][1] + ex[j][1]);
  Eigen::VectorXd r0 = H * out.nabla;
  for (int i = 0; i < nlow; ++i) r0[i] = moment(ex[i][0], ex[i][1]);
  out.l2 = H.fullPivLu().solve(r0);

  // gradient onto P_{k-1}: int g_x m = -int phi d_x m + int_dP phi m n_x
  const int dr = static_cast<int>(exponents(k - 1).size());
  Eigen::VectorXd rx(dr), ry(dr);
  const Eigen::VectorXd Hl2 = H * out.l2;
  for (int i = 0; i < dr; ++i) {
    const auto [a, b] = ex[i];
    auto idx = [&](int aa, int bb) {
      for (int m = 0; m < dim; ++m)
        if (ex[m][0] == aa && ex[m][1] == bb) return m;
      return -1;
    };
    rx[i] = boundary([&](Point2 x, Point2 n) { return mval(i, x) * n.x; }) - (a ? a / h * Hl2[idx(a - 1, b)] : 0.0);
    ry[i] = boundary([&](Point2 x, Point2 n) { return mval(i, x) * n.y; }) - (b ? b / h * Hl2[idx(a, b - 1)] : 0.0);
  }
  const Eigen::MatrixXd Hr = H.topLeftCorner(dr, dr);
  out.gx = Hr.fullPivLu().solve(rx);
  out.gy = Hr.fullPivLu().solve(ry);
  return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST(Projectors, PolynomialReproductionAllFamilies) {
  for (const auto& mesh : all_families())
    for (int k = 1; k <= 3; ++k)
      for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const ElementWorkspace ws(mesh, static_cast<int>(c), k, 2 * k + 2);
        const auto& P = ws.projectors();
        const int dim = poly_dim(k), dr = poly_dim(k - 1);
        const Eigen::MatrixXd Id = Eigen::MatrixXd::Identity(dim, dim);
        EXPECT_LE(max_abs(P.Pnab * P.D - Id), 1e-12) << "cell " << c << " k " << k;
        EXPECT_LE(max_abs(P.P0 * P.D - Id), 1e-12) << "cell " << c << " k " << k;
        // gradient projections reproduce the exact gradient at quadrature points
        const Eigen::MatrixXd gx = ws.mono().leftCols(dr) * P.grad[0] * P.D;
        const Eigen::MatrixXd gy = ws.mono().leftCols(dr) * P.grad[1] * P.D;
        EXPECT_LE(max_abs(gx - ws.mono_dx()), 1e-12 / ws.diameter());
        EXPECT_LE(max_abs(gy - ws.mono_dy()), 1e-12 / ws.diameter());
        EXPECT_LE(max_abs(ws.mono() * P.grad_k[0] * P.D - ws.mono_dx()), 1e-12 / ws.diameter());
        EXPECT_LE(max_abs(ws.mono() * P.grad_k[1] * P.D - ws.mono_dy()), 1e-12 / ws.diameter());
      }
}

TEST(Projectors, Idempotent) {
  const auto mesh = generate_nonconvex(2);
  for (int k = 1; k <= 3; ++k) {
    const ElementWorkspace ws(mesh, 1, k, 2 * k + 2);
    const auto& P = ws.projectors();
    EXPECT_LE(max_abs(P.Pnab * P.D * P.Pnab - P.Pnab), 1e-12 * std::max(1.0, max_abs(P.Pnab)));
    EXPECT_LE(max_abs(P.P0 * P.D * P.P0 - P.P0), 1e-12 * std::max(1.0, max_abs(P.P0)));
  }
}

TEST(Projectors, LowestOrderL2EqualsEnergy) {
  for (const auto& mesh : all_families())
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const ElementWorkspace ws(mesh, static_cast<int>(c), 1, 4);
      EXPECT_LE(max_abs(ws.projectors().P0 - ws.projectors().Pnab), 1e-12);
    }
}

TEST(Projectors, GradientOfLinearMonomial) {
  const auto mesh = generate_distorted_hex(3, 0.1, 2);
  const ElementWorkspace ws(mesh, 4, 2, 6);
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(6);
  coeff[MonomialBasis::index(1, 0)] = 1.0;
  const Eigen::VectorXd phi = ws.dofs_of_polynomial(coeff);
  const Eigen::VectorXd gx = ws.projectors().grad[0] * phi, gy = ws.projectors().grad[1] * phi;
  EXPECT_NEAR(gx[0], 1.0 / ws.diameter(), 1e-12);
  EXPECT_NEAR(gy[0], 0.0, 1e-12);
  for (int i = 1; i < 3; ++i) {
    EXPECT_NEAR(gx[i], 0.0, 1e-12);
    EXPECT_NEAR(gy[i], 0.0, 1e-12);
  }
}

TEST(Projectors, BoundaryMeanPreserved) {
  SplitMix64 rng(11);
  const auto mesh = generate_voronoi(Domain::UnitSquare, 4, 2, 3);
  for (int k = 1; k <= 3; ++k)
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const ElementWorkspace ws(mesh, static_cast<int>(c), k, 2 * k + 2);
      Eigen::VectorXd phi(ws.n_dofs());
      for (auto& v : phi) v = rng.uniform(-1, 1);
      const Eigen::VectorXd pi = ws.projectors().Pnab * phi;
      double diff = 0.0;
      for (const auto& e : ws.edges())
        for (std::size_t q = 0; q < e.points.size(); ++q) {
          double tr = 0.0, pv = 0.0;
          for (int j = 0; j <= k; ++j) tr += e.lagrange(q, j) * phi[e.dofs[j]];
          for (int a = 0; a < ws.basis().size(); ++a) pv += pi[a] * ws.basis().value(a, e.points[q]);
          diff += e.weights[q] * (tr - pv);
        }
      EXPECT_NEAR(diff, 0.0, 1e-13);
    }
}

TEST(Projectors, MatchDefiningRelationsOracle) {
  SplitMix64 rng(3);
  for (const auto& mesh : all_families())
    for (int k = 1; k <= 3; ++k)
      for (std::size_t c = 0; c < mesh.num_cells(); c += 2) {
        const ElementWorkspace ws(mesh, static_cast<int>(c), k, 2 * k + 2);
        const auto& P = ws.projectors();
        for (int trial = 0; trial < 3; ++trial) {
          Eigen::VectorXd phi(ws.n_dofs());
          for (auto& v : phi) v = rng.uniform(-1, 1);
          const auto o = oracle_projections(ws.vertices(), k, phi);
          const double scale = std::max(1.0, o.l2.cwiseAbs().maxCoeff());
          EXPECT_LE((P.Pnab * phi - o.nabla).cwiseAbs().maxCoeff(), 1e-10 * scale) << "cell " << c << " k " << k;
          EXPECT_LE((P.P0 * phi - o.l2).cwiseAbs().maxCoeff(), 1e-10 * scale) << "cell " << c << " k " << k;
          EXPECT_LE((P.grad[0] * phi - o.gx).cwiseAbs().maxCoeff() * ws.diameter(), 1e-10);
          EXPECT_LE((P.grad[1] * phi - o.gy).cwiseAbs().maxCoeff() * ws.diameter(), 1e-10);
        }
      }
}

TEST(Projectors, MomentDofOnSquareAgainstBruteForce) {
  // k = 2 on the unit square, virtual function with unit interior moment:
  // the Gram system assembled by brute-force quadrature gives the same projection.
  const auto mesh = generate_structured(Domain::UnitSquare, 1);
  const ElementWorkspace ws(mesh, 0, 2, 6);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(ws.n_dofs());
  phi[ws.first_moment()] = 1.0;
  const auto pts = ws.vertices();
  const Point2 c{0.5, 0.5};
  const double h = std::sqrt(2.0);
  const auto ex = exponents(2);
  Eigen::MatrixXd G(6, 6);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i == 0) {
        // boundary mean row: composite Simpson along each side
        double s = 0.0;
        const int n = 200;
        for (int e = 0; e < 4; ++e)
          for (int t = 0; t <= 2 * n; ++t) {
            const Point2 x = pts[e] + (t / (2.0 * n)) * (pts[(e + 1) % 4] - pts[e]);
            const double wt = (t == 0 || t == 2 * n) ? 1.0 : (t % 2 ? 4.0 : 2.0);
            s += wt / (6.0 * n) * std::pow((x.x - c.x) / h, ex[j][0]) * std::pow((x.y - c.y) / h, ex[j][1]);
          }
        G(0, j) = s;
        continue;
      }
      G(i, j) = oracle::brute_force_integral(pts, c, 4, [&](Point2 x) {
        auto grad = [&](int m) {
          const double X = (x.x - c.x) / h, Y = (x.y - c.y) / h;
          const int a = ex[m][0], b = ex[m][1];
          return Point2{a ? a * std::pow(X, a - 1) * std::pow(Y, b) / h : 0.0,
                        b ? b * std::pow(X, a) * std::pow(Y, b - 1) / h : 0.0};
        };
        return dot(grad(i), grad(j));
      });
    }
  }
  // zero trace, so only -int phi Lap m survives: Lap m_(2,0) = 2/h^2, moment 1 => -2|P|/h^2
  rhs[3] = -2.0 / (h * h);
  rhs[5] = -2.0 / (h * h);
  const Eigen::VectorXd expected = G.fullPivLu().solve(rhs);
  EXPECT_LE((ws.projectors().Pnab * phi - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Projectors, SingularLocalSystemThrows) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Ones(3, 3);
  EXPECT_THROW(solve_local(A, Eigen::MatrixXd::Identity(3, 3), 7, "test"), GeometryError);
}
