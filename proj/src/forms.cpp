#include "spbvem/forms.hpp"

#include <cmath>
#include <sstream>

#include "spbvem/error.hpp"

namespace spbvem {

void Coefficients::validate() const {
  if (!(mu > 0.0)) throw ValidationError("mu must be positive");
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (!(alpha0 >= 0.0)) throw ValidationError("alpha0 must be non-negative");
  if (!(alpha1 > 0.0)) throw ValidationError("alpha1 must be positive");
  if (!std::isfinite(E.x) || !std::isfinite(E.y)) throw ValidationError("E must be finite");
}

double Coefficients::kappa(double psi) const { return alpha0 * std::sinh(alpha1 * psi); }
double Coefficients::kappa_prime(double psi) const { return alpha0 * alpha1 * std::cosh(alpha1 * psi); }

void StabParams::validate() const {
  if (!(c_tau > 0.0)) throw ValidationError("c_tau must be positive");
  if (!(c_delta > 0.0)) throw ValidationError("c_delta must be positive");
}

Eigen::MatrixXd lower_energy_projector(const LocalProjectors& proj, int k) {
  const int d = poly_dim(k - 1);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(proj.G.topLeftCorner(d, d));
  if (!lu.isInvertible()) throw GeometryError("singular lower-order energy projection");
  return lu.solve(proj.B.topRows(d));
}

Eigen::MatrixXd dofi_dofi_stabilizer(const Eigen::MatrixXd& D, const Eigen::MatrixXd& Pi) {
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(D.rows(), D.rows()) - D * Pi;
  return R.transpose() * R;
}

ElementForms::ElementForms(const PolygonalMesh& mesh, int cell, int k, int quad_degree)
    : ws_(mesh, cell, k, quad_degree) {
  const auto& P = ws_.projectors();
  const auto& q = ws_.quadrature();
  w_ = Eigen::VectorXd::Map(q.weights.data(), static_cast<Eigen::Index>(q.weights.size()));
  const int dr = poly_dim(k - 1);
  N0_ = ws_.mono() * P.P0;
  Lap_ = Eigen::MatrixXd::Zero(N0_.rows(), n());
  for (int d = 0; d < 2; ++d) {
    Gr_[d] = ws_.mono().leftCols(dr) * P.grad[d];
    Gk_[d] = ws_.mono() * P.grad_k[d];
  }
  Lap_ = ws_.mono_dx().leftCols(dr) * P.grad[0] + ws_.mono_dy().leftCols(dr) * P.grad[1];
  const Eigen::MatrixXd Hr = P.H.topLeftCorner(dr, dr);
  K_ = P.grad[0].transpose() * Hr * P.grad[0] + P.grad[1].transpose() * Hr * P.grad[1];
  S_ = dofi_dofi_stabilizer(P.D, P.Pnab);
  {
    const int n = ws_.n_dofs(), d = poly_dim(k - 1);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    S2_ = (I - P.D * P.Pnab).transpose() * (I - P.D.leftCols(d) * lower_energy_projector(P, k));
  }
  mean_ = (P.H.row(0) * P.P0).transpose();
}

namespace {

Eigen::MatrixXd weighted(const Eigen::MatrixXd& L, const Eigen::VectorXd& wq, const Eigen::MatrixXd& R) {
  return L.transpose() * wq.asDiagonal() * R;
}

Eigen::MatrixXd block_diag2(const Eigen::MatrixXd& M) {
  const auto n = M.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = M;
  out.bottomRightCorner(n, n) = M;
  return out;
}

void check_sinh_range(const ElementForms& el, const Coefficients& c, const Eigen::VectorXd& psi_q) {
  const double m = psi_q.size() ? (c.alpha1 * psi_q).cwiseAbs().maxCoeff() : 0.0;
  if (!(m <= 700.0)) {
    std::ostringstream os;
    os << "element " << el.workspace().id() << ": |alpha1 psi| = " << m
       << " overflows sinh; the potential iterate has blown up";
    throw SolverError(os.str());
  }
}

}  // namespace

Eigen::MatrixXd a_Vh_local(const ElementForms& el, const Coefficients& c) {
  return block_diag2(c.mu * (el.K() + el.S()));
}

Eigen::MatrixXd b_h_local(const ElementForms& el) {
  const int n = el.n();
  Eigen::MatrixXd B(n, 2 * n);
  for (int d = 0; d < 2; ++d) B.middleCols(d * n, n) = weighted(el.N0(), el.w(), el.Gr(d));
  return B;
}

Eigen::MatrixXd c_h_local(const ElementForms& el, const Coefficients& c, const Eigen::VectorXd& psi) {
  const int n = el.n();
  const double E[2] = {c.E.x, c.E.y};
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int cc = 0; cc < 2; ++cc) {
    const Eigen::VectorXd gpsi = el.Gk(cc) * psi;
    const Eigen::MatrixXd base = weighted(el.N0(), el.w().cwiseProduct(gpsi), el.N0());
    for (int d = 0; d < 2; ++d)
      if (E[d] != 0.0) M.block(d * n, cc * n, n, n) = E[d] * base;
  }
  return M;
}

Eigen::MatrixXd L1_h_local(const ElementForms& el, const StabParams& s) {
  const double tau = s.tau(el.h());
  const Eigen::MatrixXd& S = s.pressure == PressureStab::Mixed ? el.S2() : el.S();
  return tau * (weighted(el.Gk(0), el.w(), el.Gk(0)) + weighted(el.Gk(1), el.w(), el.Gk(1)) + S);
}

Eigen::MatrixXd L2_h_local(const ElementForms& el, const Coefficients& c, const StabParams& s,
                           const Eigen::VectorXd& psi) {
  const int n = el.n();
  const double tau = s.tau(el.h());
  const Eigen::MatrixXd EGq = c.E.x * el.Gr(0) + c.E.y * el.Gr(1);  // E . Pi0 grad q
  Eigen::MatrixXd M(n, 2 * n);
  for (int cc = 0; cc < 2; ++cc) {
    const Eigen::VectorXd gpsi = el.Gr(cc) * psi;
    M.middleCols(cc * n, n) =
        tau * (-c.mu * weighted(el.Gr(cc), el.w(), el.Lap()) + weighted(EGq, el.w().cwiseProduct(gpsi), el.N0()));
  }
  return M;
}

Eigen::MatrixXd L3_h_local(const ElementForms& el, const StabParams& s) {
  const int n = el.n();
  const double delta = s.delta(el.h());
  Eigen::MatrixXd M(2 * n, 2 * n);
  for (int d = 0; d < 2; ++d)
    for (int cc = 0; cc < 2; ++cc) M.block(d * n, cc * n, n, n) = delta * weighted(el.Gr(d), el.w(), el.Gr(cc));
  M.topLeftCorner(n, n) += delta * el.S();
  M.bottomRightCorner(n, n) += delta * el.S();
  return M;
}

Eigen::MatrixXd a_ph_local(const ElementForms& el, const Coefficients& c) { return c.eps * (el.K() + el.S()); }

Eigen::MatrixXd c_ph_local(const ElementForms& el, const Eigen::VectorXd& u) {
  const int n = el.n();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int cc = 0; cc < 2; ++cc) {
    const Eigen::VectorXd uq = el.N0() * u.segment(cc * n, n);
    M += weighted(el.N0(), el.w().cwiseProduct(uq), el.Gr(cc));
  }
  return M;
}

Eigen::MatrixXd c_skew_ph_local(const ElementForms& el, const Eigen::VectorXd& u) {
  const Eigen::MatrixXd C = c_ph_local(el, u);
  return 0.5 * (C - C.transpose());
}

Eigen::VectorXd d_h_local(const ElementForms& el, const Coefficients& c, const Eigen::VectorXd& psi) {
  const Eigen::VectorXd pq = el.N0() * psi;
  check_sinh_range(el, c, pq);
  Eigen::VectorXd kq(pq.size());
  for (Eigen::Index i = 0; i < pq.size(); ++i) kq[i] = el.w()[i] * c.kappa(pq[i]);
  return el.N0().transpose() * kq;
}

Eigen::MatrixXd d_h_jacobian(const ElementForms& el, const Coefficients& c, const Eigen::VectorXd& psi) {
  const Eigen::VectorXd pq = el.N0() * psi;
  check_sinh_range(el, c, pq);
  Eigen::VectorXd kq(pq.size());
  for (Eigen::Index i = 0; i < pq.size(); ++i) kq[i] = el.w()[i] * c.kappa_prime(pq[i]);
  return el.N0().transpose() * kq.asDiagonal() * el.N0();
}

PspgLoad F_pspg_h_local(const ElementForms& el, const Coefficients& c, const StabParams& s,
                        const Eigen::VectorXd& psi) {
  const int n = el.n();
  const auto& pts = el.workspace().quadrature().points;
  const Eigen::Index nq = el.w().size();
  const Eigen::VectorXd pq = el.N0() * psi;
  if (c.alpha0 != 0.0) check_sinh_range(el, c, pq);
  Eigen::VectorXd rx(nq), ry(nq);  // weighted total force at the quadrature points
  for (Eigen::Index i = 0; i < nq; ++i) {
    const Point2 f = c.f ? c.f(pts[i]) : Point2{0.0, 0.0};
    const double r = (c.g ? c.g(pts[i]) : 0.0) - c.kappa(pq[i]);
    rx[i] = el.w()[i] * (f.x + r * c.E.x);
    ry[i] = el.w()[i] * (f.y + r * c.E.y);
  }
  PspgLoad out;
  out.v.resize(2 * n);
  out.v.head(n) = el.N0().transpose() * rx;
  out.v.tail(n) = el.N0().transpose() * ry;
  out.q = s.tau(el.h()) * (el.Gr(0).transpose() * rx + el.Gr(1).transpose() * ry);
  return out;
}

Eigen::VectorXd g_h_local(const ElementForms& el, const Coefficients& c) {
  const auto& pts = el.workspace().quadrature().points;
  Eigen::VectorXd gq(el.w().size());
  for (Eigen::Index i = 0; i < gq.size(); ++i) gq[i] = el.w()[i] * (c.g ? c.g(pts[i]) : 0.0);
  return el.N0().transpose() * gq;
}

LocalStokesBlocks local_stokes_blocks(const ElementForms& el, const Coefficients& c, const StabParams& s,
                                      const Eigen::VectorXd& psi, bool with_coupling) {
  LocalStokesBlocks b;
  b.A = a_Vh_local(el, c) + L3_h_local(el, s);
  if (with_coupling) b.A += c_h_local(el, c, psi);
  b.B = b_h_local(el);
  b.Bt = -b.B.transpose();
  b.C = L1_h_local(el, s);
  b.L2row = L2_h_local(el, c, s, with_coupling ? psi : Eigen::VectorXd::Zero(el.n()));
  auto load = F_pspg_h_local(el, c, s, psi);
  b.rhs_v = std::move(load.v);
  b.rhs_q = std::move(load.q);
  return b;
}

}  // namespace spbvem
