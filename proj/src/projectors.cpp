#include "spbvem/projectors.hpp"

#include <sstream>

#include "spbvem/error.hpp"

namespace spbvem {

Eigen::MatrixXd solve_local(const Eigen::MatrixXd& A, const Eigen::MatrixXd& R, int element_id, const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (!(lu.rcond() > 1e-14)) {
    std::ostringstream os;
    os << "element " << element_id << ": singular " << what << " (rcond " << lu.rcond() << "), degenerate geometry";
    throw GeometryError(os.str());
  }
  return lu.solve(R);
}

ElementWorkspace::ElementWorkspace(const PolygonalMesh& mesh, int cell, int k, int quad_degree)
    : id_(cell), k_(k), vertices_(mesh.cell_points(cell)) {
  const auto g = polygon_geometry(vertices_);
  area_ = g.area;
  centroid_ = g.centroid;
  diameter_ = g.diameter;
  basis_ = MonomialBasis(k, centroid_, diameter_);
  quad_ = polygon_quadrature(vertices_, quad_degree, cell);

  const int nv = n_vertices();
  const int dim = basis_.size();
  n_dofs_ = nv * k + poly_dim(k - 2);

  const int nq = static_cast<int>(quad_.points.size());
  mono_.resize(nq, dim);
  mono_dx_.resize(nq, dim);
  mono_dy_.resize(nq, dim);
  std::vector<double> v(dim), dx(dim), dy(dim);
  for (int q = 0; q < nq; ++q) {
    basis_.values(quad_.points[q], v);
    basis_.gradients(quad_.points[q], dx, dy);
    for (int i = 0; i < dim; ++i) {
      mono_(q, i) = v[i];
      mono_dx_(q, i) = dx[i];
      mono_dy_(q, i) = dy[i];
    }
  }

  // nodal positions and edge traces
  const auto gl = gauss_lobatto_edge_nodes(k);
  std::vector<double> tnodes{0.0};
  tnodes.insert(tnodes.end(), gl.begin(), gl.end());
  tnodes.push_back(1.0);
  nodes_ = vertices_;
  for (int i = 0; i < nv; ++i) {
    const Point2 a = vertices_[i], b = vertices_[(i + 1) % nv];
    for (int j = 0; j < k - 1; ++j) nodes_.push_back(a + gl[j] * (b - a));
  }
  const auto rule = gauss_legendre(k + 2);
  edges_.resize(nv);
  for (int i = 0; i < nv; ++i) {
    auto& e = edges_[i];
    const Point2 a = vertices_[i], b = vertices_[(i + 1) % nv];
    const Point2 d = b - a;
    e.length = norm(d);
    e.normal = {d.y / e.length, -d.x / e.length};
    e.dofs.push_back(i);
    for (int j = 0; j < k - 1; ++j) e.dofs.push_back(nv + i * (k - 1) + j);
    e.dofs.push_back((i + 1) % nv);
    const int np = static_cast<int>(rule.nodes.size());
    e.lagrange.resize(np, k + 1);
    for (int q = 0; q < np; ++q) {
      const double t = rule.nodes[q];
      e.points.push_back(a + t * d);
      e.weights.push_back(rule.weights[q] * e.length);
      for (int j = 0; j <= k; ++j) {
        double l = 1.0;
        for (int m = 0; m <= k; ++m)
          if (m != j) l *= (t - tnodes[m]) / (tnodes[j] - tnodes[m]);
        e.lagrange(q, j) = l;
      }
    }
  }

  // monomial mass matrix and DOFs of monomials
  proj_.H = mono_.transpose() * Eigen::VectorXd::Map(quad_.weights.data(), nq).asDiagonal() * mono_;
  proj_.D.resize(n_dofs_, dim);
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    basis_.values(nodes_[i], v);
    for (int b = 0; b < dim; ++b) proj_.D(i, b) = v[b];
  }
  for (int m = 0; m < n_moments(); ++m) proj_.D.row(first_moment() + m) = proj_.H.row(m) / area_;

  compute_nabla_projector(*this, proj_);
  compute_l2_projector(*this, proj_);
  proj_.grad = compute_grad_l2_projector(*this, proj_, k - 1);
  proj_.grad_k = compute_grad_l2_projector(*this, proj_, k);
}

void compute_nabla_projector(const ElementWorkspace& ws, LocalProjectors& proj) {
  const auto& basis = ws.basis();
  const int dim = basis.size();
  const int n = ws.n_dofs();
  const int nq = static_cast<int>(ws.quadrature().points.size());
  const auto w = Eigen::VectorXd::Map(ws.quadrature().weights.data(), nq);

  proj.G = ws.mono_dx().transpose() * w.asDiagonal() * ws.mono_dx() +
           ws.mono_dy().transpose() * w.asDiagonal() * ws.mono_dy();
  proj.G.row(0).setZero();
  proj.B = Eigen::MatrixXd::Zero(dim, n);

  std::vector<double> mv(dim);
  for (const auto& e : ws.edges()) {
    for (std::size_t q = 0; q < e.points.size(); ++q) {
      basis.values(e.points[q], mv);
      for (int b = 0; b < dim; ++b) proj.G(0, b) += e.weights[q] * mv[b];
      for (int j = 0; j < static_cast<int>(e.dofs.size()); ++j) {
        const double lw = e.weights[q] * e.lagrange(q, j);
        proj.B(0, e.dofs[j]) += lw;
        for (int a = 1; a < dim; ++a) proj.B(a, e.dofs[j]) += lw * dot(basis.gradient(a, e.points[q]), e.normal);
      }
    }
  }
  // -int phi Lap m_a through the interior moments
  const double h2 = ws.diameter() * ws.diameter();
  for (int a = 1; a < dim; ++a) {
    const auto [ea, eb] = basis.exponent(a);
    if (ea >= 2) proj.B(a, ws.first_moment() + MonomialBasis::index(ea - 2, eb)) -= ea * (ea - 1) * ws.area() / h2;
    if (eb >= 2) proj.B(a, ws.first_moment() + MonomialBasis::index(ea, eb - 2)) -= eb * (eb - 1) * ws.area() / h2;
  }
  proj.Pnab = solve_local(proj.G, proj.B, ws.id(), "energy projection matrix");
}

void compute_l2_projector(const ElementWorkspace& ws, LocalProjectors& proj) {
  const int dim = ws.basis().size();
  const int low = poly_dim(ws.k() - 2);
  Eigen::MatrixXd C = proj.H * proj.Pnab;
  C.topRows(low).setZero();
  for (int a = 0; a < low; ++a) C(a, ws.first_moment() + a) = ws.area();
  proj.P0 = solve_local(proj.H, C, ws.id(), "mass matrix");
  (void)dim;
}

std::array<Eigen::MatrixXd, 2> compute_grad_l2_projector(const ElementWorkspace& ws, const LocalProjectors& proj,
                                                         int order) {
  const auto& basis = ws.basis();
  const int dr = poly_dim(order);
  const int n = ws.n_dofs();
  std::array<Eigen::MatrixXd, 2> out;
  if (dr == 0) {
    out[0] = out[1] = Eigen::MatrixXd::Zero(0, n);
    return out;
  }
  const Eigen::MatrixXd HP0 = proj.H * proj.P0;  // int (Pi0 phi) m_b
  std::array<Eigen::MatrixXd, 2> R{Eigen::MatrixXd::Zero(dr, n), Eigen::MatrixXd::Zero(dr, n)};
  const double h = ws.diameter();
  for (int a = 0; a < dr; ++a) {
    const auto [ea, eb] = basis.exponent(a);
    if (ea >= 1) R[0].row(a) -= (ea / h) * HP0.row(MonomialBasis::index(ea - 1, eb));
    if (eb >= 1) R[1].row(a) -= (eb / h) * HP0.row(MonomialBasis::index(ea, eb - 1));
  }
  std::vector<double> mv(basis.size());
  for (const auto& e : ws.edges())
    for (std::size_t q = 0; q < e.points.size(); ++q) {
      basis.values(e.points[q], mv);
      for (int j = 0; j < static_cast<int>(e.dofs.size()); ++j) {
        const double lw = e.weights[q] * e.lagrange(q, j);
        for (int a = 0; a < dr; ++a) {
          R[0](a, e.dofs[j]) += lw * mv[a] * e.normal.x;
          R[1](a, e.dofs[j]) += lw * mv[a] * e.normal.y;
        }
      }
    }
  const Eigen::MatrixXd Hr = proj.H.topLeftCorner(dr, dr);
  out[0] = solve_local(Hr, R[0], ws.id(), "gradient mass matrix");
  out[1] = solve_local(Hr, R[1], ws.id(), "gradient mass matrix");
  return out;
}

}  // namespace spbvem
