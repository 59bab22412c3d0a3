#pragma once

#include <functional>

#include <Eigen/Dense>

#include "spbvem/projectors.hpp"

namespace spbvem {

struct Coefficients {
  double mu = 1.0;
  double eps = 1.0;
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  Point2 E{0.0, -1.0};
  std::function<Point2(Point2)> f;  // body force
  std::function<double(Point2)> g;  // potential load

  /// Throws ValidationError when mu <= 0, eps <= 0, alpha0 < 0, alpha1 <= 0 or E is not finite.
  void validate() const;
  double kappa(double psi) const;
  double kappa_prime(double psi) const;
};

/// Pressure stabilizer inside L1: Mixed pairs (p - Pi_{k-1} p) with
/// (q - Pi_k q) as written in the method; Full uses Pi_k on both sides and is
/// symmetric.
enum class PressureStab { Mixed, Full };

/// tau_P = c_tau h_P^2 and delta_E = c_delta h_P.
struct StabParams {
  double c_tau = 0.25;
  double c_delta = 1.0;
  PressureStab pressure = PressureStab::Mixed;

  void validate() const;
  double tau(double h) const { return c_tau * h * h; }
  double delta(double h) const { return c_delta * h; }
};

/// Default quadrature degree for the forms: exact for the trilinear terms on
/// polynomial arguments.
inline int forms_quadrature_degree(int k) { return std::max(2 * k + 2, 3 * k); }

/// S = (I - D Pi)^T (I - D Pi): Euclidean product of the DOF residuals after
/// removing the polynomial part.
Eigen::MatrixXd dofi_dofi_stabilizer(const Eigen::MatrixXd& D, const Eigen::MatrixXd& Pi);

/// Energy projection onto P_{k-1} from the degree-k projector data: the
/// leading block of G and B. [dim P_{k-1} x n_dof]
Eigen::MatrixXd lower_energy_projector(const LocalProjectors& proj, int k);

/// Element data in the form the local forms consume: projected fields at the
/// quadrature points, [n_quad x n_dofs] each.
class ElementForms {
 public:
  ElementForms(const PolygonalMesh& mesh, int cell, int k, int quad_degree);
  ElementForms(const PolygonalMesh& mesh, int cell, int k) : ElementForms(mesh, cell, k, forms_quadrature_degree(k)) {}

  const ElementWorkspace& workspace() const { return ws_; }
  int n() const { return ws_.n_dofs(); }
  double h() const { return ws_.diameter(); }

  const Eigen::VectorXd& w() const { return w_; }             // quadrature weights
  const Eigen::MatrixXd& N0() const { return N0_; }           // Pi0_k phi
  const Eigen::MatrixXd& Gr(int d) const { return Gr_[d]; }   // Pi0_{k-1} d_d phi
  const Eigen::MatrixXd& Gk(int d) const { return Gk_[d]; }   // Pi0_k d_d phi
  const Eigen::MatrixXd& Lap() const { return Lap_; }         // div Pi0_{k-1} grad phi
  const Eigen::MatrixXd& K() const { return K_; }             // int Pi0_{k-1} grad . Pi0_{k-1} grad
  const Eigen::MatrixXd& S() const { return S_; }             // dofi-dofi stabilizer of Pi_nabla
  const Eigen::MatrixXd& S2() const { return S2_; }           // (I - D Pi_k)^T (I - D Pi_{k-1})
  const Eigen::VectorXd& mean() const { return mean_; }       // int Pi0_k phi

 private:
  ElementWorkspace ws_;
  Eigen::VectorXd w_;
  Eigen::MatrixXd N0_;
  std::array<Eigen::MatrixXd, 2> Gr_, Gk_;
  Eigen::MatrixXd Lap_, K_, S_, S2_;
  Eigen::VectorXd mean_;
};

// Local forms. Vector fields use the local layout [component x | component y],
// each of length n. Matrices are indexed (test, trial).

/// mu (int Pi0 grad u : Pi0 grad v + S(u, v)), [2n x 2n].
Eigen::MatrixXd a_Vh_local(const ElementForms& el, const Coefficients& c);
/// int (Pi0_{k-1} div v)(Pi0_k q), rows q, columns v: [n x 2n].
Eigen::MatrixXd b_h_local(const ElementForms& el);
/// int (Pi0_k u . Pi0_k grad psi)(E . Pi0_k v), rows v, columns u: [2n x 2n].
Eigen::MatrixXd c_h_local(const ElementForms& el, const Coefficients& c, const Eigen::VectorXd& psi);
/// tau (int Pi0_k grad p . Pi0_k grad q + S(p, q)), [n x n].
Eigen::MatrixXd L1_h_local(const ElementForms& el, const StabParams& s);
/// tau int (-mu div Pi0_{k-1} grad u + (Pi0_k u . Pi0_{k-1} grad psi) E) . Pi0_{k-1} grad q,
/// rows q, columns u: [n x 2n].
Eigen::MatrixXd L2_h_local(const ElementForms& el, const Coefficients& c, const StabParams& s,
                           const Eigen::VectorXd& psi);
/// delta (int Pi0_{k-1} div u Pi0_{k-1} div v + S(u, v)), [2n x 2n].
Eigen::MatrixXd L3_h_local(const ElementForms& el, const StabParams& s);

/// eps (int Pi0 grad phi . Pi0 grad xi + S(phi, xi)), [n x n].
Eigen::MatrixXd a_ph_local(const ElementForms& el, const Coefficients& c);
/// int (Pi0_k u . Pi0_{k-1} grad phi) Pi0_k xi, rows xi, columns phi.
Eigen::MatrixXd c_ph_local(const ElementForms& el, const Eigen::VectorXd& u);
/// Skew-symmetric part of c_ph_local.
Eigen::MatrixXd c_skew_ph_local(const ElementForms& el, const Eigen::VectorXd& u);
/// int kappa(Pi0_k psi) Pi0_k xi. Throws SolverError when sinh would overflow.
Eigen::VectorXd d_h_local(const ElementForms& el, const Coefficients& c, const Eigen::VectorXd& psi);
Eigen::MatrixXd d_h_jacobian(const ElementForms& el, const Coefficients& c, const Eigen::VectorXd& psi);

struct PspgLoad {
  Eigen::VectorXd v;  // momentum rows, 2n
  Eigen::VectorXd q;  // pressure rows, n
};
/// Momentum and PSPG loads with psi frozen at the previous iterate.
PspgLoad F_pspg_h_local(const ElementForms& el, const Coefficients& c, const StabParams& s,
                        const Eigen::VectorXd& psi);
/// int g Pi0_k xi.
Eigen::VectorXd g_h_local(const ElementForms& el, const Coefficients& c);

struct LocalStokesBlocks {
  Eigen::MatrixXd A;      // a_V + c_h + L3, [2n x 2n]
  Eigen::MatrixXd Bt;     // -b_h(v, p), [2n x n]
  Eigen::MatrixXd B;      // b_h(u, q), [n x 2n]
  Eigen::MatrixXd C;      // L1, [n x n]
  Eigen::MatrixXd L2row;  // L2, [n x 2n]
  Eigen::VectorXd rhs_v;
  Eigen::VectorXd rhs_q;
};

LocalStokesBlocks local_stokes_blocks(const ElementForms& el, const Coefficients& c, const StabParams& s,
                                      const Eigen::VectorXd& psi, bool with_coupling = true);

}  // namespace spbvem
