#include "spbvem/solver.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#ifdef SPBVEM_HAVE_KLU
#include <Eigen/KLUSupport>
#endif

#include "spbvem/error.hpp"

namespace spbvem {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

Discretization::Discretization(PolygonalMesh mesh, int k) : mesh_(std::move(mesh)), dofs_(mesh_, k) {
  if (k < 1 || k > 3) throw ValidationError("VEM order k must be 1, 2 or 3");
  elements_.reserve(mesh_.num_cells());
  for (std::size_t c = 0; c < mesh_.num_cells(); ++c) elements_.emplace_back(mesh_, static_cast<int>(c), k);
}

Eigen::VectorXd Discretization::gather(int cell, const Eigen::VectorXd& field) const {
  const auto& ids = dofs_.cell_dofs(cell);
  Eigen::VectorXd out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = field[ids[i]];
  return out;
}

Eigen::VectorXd Discretization::gather_vector(int cell, const Eigen::VectorXd& velocity) const {
  const auto& ids = dofs_.cell_dofs(cell);
  const int n = static_cast<int>(ids.size()), ns = dofs_.scalar_size();
  Eigen::VectorXd out(2 * n);
  for (int i = 0; i < n; ++i) {
    out[i] = velocity[ids[i]];
    out[n + i] = velocity[ns + ids[i]];
  }
  return out;
}

void SolverConfig::validate() const {
  if (!(fixed_point_tol > 0.0)) throw ValidationError("fixed_point_tol must be positive");
  if (!(newton_tol > 0.0)) throw ValidationError("newton_tol must be positive");
  if (max_outer < 1) throw ValidationError("max_outer must be >= 1");
  if (max_newton < 1) throw ValidationError("max_newton must be >= 1");
  stab.validate();
}

Eigen::VectorXd ConstrainedSystem::expand(const Eigen::VectorXd& reduced) const {
  Eigen::VectorXd full = values;
  for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = reduced[static_cast<Eigen::Index>(i)];
  return full;
}

GlobalSystem assemble_stokes(const Discretization& disc, const Coefficients& coeffs, const StabParams& stab,
                             const Eigen::VectorXd& psi, bool with_coupling) {
  const int ns = disc.dofs().scalar_size();
  GlobalSystem sys;
  sys.n_velocity = 2 * ns;
  sys.n_pressure = ns;
  sys.rhs = Eigen::VectorXd::Zero(3 * ns);
  std::vector<Triplet> trip;
  for (std::size_t c = 0; c < disc.elements().size(); ++c) {
    const auto& el = disc.elements()[c];
    const auto& ids = disc.dofs().cell_dofs(static_cast<int>(c));
    const int n = el.n();
    const auto blk = local_stokes_blocks(el, coeffs, stab, disc.gather(static_cast<int>(c), psi), with_coupling);
    Eigen::MatrixXd M(3 * n, 3 * n);
    M << blk.A, blk.Bt, blk.B + blk.L2row, blk.C;
    std::vector<int> g(3 * n);
    for (int i = 0; i < n; ++i) {
      g[i] = ids[i];
      g[n + i] = ns + ids[i];
      g[2 * n + i] = 2 * ns + ids[i];
    }
    for (int i = 0; i < 3 * n; ++i) {
      sys.rhs[g[i]] += i < 2 * n ? blk.rhs_v[i] : blk.rhs_q[i - 2 * n];
      for (int j = 0; j < 3 * n; ++j)
        if (M(i, j) != 0.0) trip.emplace_back(g[i], g[j], M(i, j));
    }
  }
  sys.A.resize(3 * ns, 3 * ns);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

Eigen::VectorXd pressure_mean_weights(const Discretization& disc) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(disc.dofs().scalar_size());
  for (std::size_t c = 0; c < disc.elements().size(); ++c) {
    const auto& ids = disc.dofs().cell_dofs(static_cast<int>(c));
    const auto& m = disc.elements()[c].mean();
    for (std::size_t i = 0; i < ids.size(); ++i) w[ids[i]] += m[static_cast<Eigen::Index>(i)];
  }
  return w;
}

void apply_zero_mean_pressure(const Discretization& disc, GlobalSystem& sys) {
  if (sys.n_multiplier) return;
  const Eigen::VectorXd w = pressure_mean_weights(disc);
  const int n = static_cast<int>(sys.A.rows()), off = sys.n_velocity;
  std::vector<Triplet> trip;
  trip.reserve(sys.A.nonZeros() + 2 * w.size());
  for (int r = 0; r < sys.A.outerSize(); ++r)
    for (SpMat::InnerIterator it(sys.A, r); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    trip.emplace_back(off + static_cast<int>(i), n, w[i]);
    trip.emplace_back(n, off + static_cast<int>(i), w[i]);
  }
  sys.A.resize(n + 1, n + 1);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.rhs.conservativeResize(n + 1);
  sys.rhs[n] = 0.0;
  sys.n_multiplier = 1;
}

ConstrainedSystem apply_dirichlet(const SpMat& A, const Eigen::VectorXd& rhs, const std::vector<int>& constrained,
                                  const Eigen::VectorXd& values) {
  const int n = static_cast<int>(A.rows());
  std::vector<int> map(n, 0);
  for (int c : constrained) map[c] = -1;
  ConstrainedSystem out;
  out.values = Eigen::VectorXd::Zero(n);
  for (int c : constrained) out.values[c] = values[c];
  for (int i = 0; i < n; ++i)
    if (map[i] == 0) {
      map[i] = static_cast<int>(out.free.size());
      out.free.push_back(i);
    }
  const int nf = static_cast<int>(out.free.size());
  out.rhs.resize(nf);
  std::vector<Triplet> trip;
  trip.reserve(A.nonZeros());
  for (int r = 0; r < n; ++r) {
    if (map[r] < 0) continue;
    double b = rhs[r];
    for (SpMat::InnerIterator it(A, r); it; ++it) {
      const int col = static_cast<int>(it.col());
      if (map[col] >= 0)
        trip.emplace_back(map[r], map[col], it.value());
      else
        b -= it.value() * out.values[col];
    }
    out.rhs[map[r]] = b;
  }
  out.A.resize(nf, nf);
  out.A.setFromTriplets(trip.begin(), trip.end());
  return out;
}

std::vector<std::pair<int, double>> dirichlet_values(const Discretization& disc,
                                                     const std::function<double(Point2)>& trace) {
  const auto& d = disc.dofs();
  std::vector<std::pair<int, double>> out;
  for (int i = 0; i < d.scalar_size(); ++i) {
    if (!d.on_boundary(i)) continue;
    if (!trace) throw ValidationError("no boundary value supplied for a Dirichlet boundary");
    out.emplace_back(i, trace(d.node_position(i)));
  }
  return out;
}

const char* direct_solver_name() {
#ifdef SPBVEM_HAVE_KLU
  return "klu";
#else
  return "eigen-sparselu";
#endif
}

Eigen::VectorXd linear_solve(const SpMat& A, const Eigen::VectorXd& rhs, LinearSolverKind kind) {
  if (A.rows() != A.cols() || A.rows() != rhs.size()) throw ValidationError("linear_solve: dimension mismatch");
  if (A.rows() == 0) return Eigen::VectorXd();
  const Eigen::SparseMatrix<double> Ac = A;
  Eigen::VectorXd x;
  if (kind == LinearSolverKind::Direct) {
#ifdef SPBVEM_HAVE_KLU
    Eigen::KLU<Eigen::SparseMatrix<double>> lu;
#else
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
#endif
    lu.compute(Ac);
    if (lu.info() != Eigen::Success) throw SolverError("sparse factorization failed: singular matrix (missing constraint or broken mesh)");
    x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw SolverError("sparse triangular solve failed");
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-6);
    it.preconditioner().setFillfactor(20);
    it.setTolerance(1e-13);
    it.setMaxIterations(20000);
    it.compute(Ac);
    if (it.info() != Eigen::Success) throw SolverError("incomplete factorization failed");
    x = it.solve(rhs);
  }
  const double bn = rhs.cwiseAbs().maxCoeff();
  const double rn = (Ac * x - rhs).cwiseAbs().maxCoeff();
  if (!std::isfinite(rn) || rn > 1e-9 * std::max(bn, 1e-300)) {
    if (!(bn == 0.0 && rn == 0.0)) {
      std::ostringstream os;
      os << "linear solve residual " << rn << " exceeds 1e-9 relative (rhs norm " << bn << ")";
      throw SolverError(os.str(), {rn});
    }
  }
  return x;
}

Eigen::VectorXd zero_mean_solve(const SpMat& A, const Eigen::VectorXd& rhs, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& z, LinearSolverKind kind) {
  const int n = static_cast<int>(A.rows());
  if (w.size() != n || z.size() != n || rhs.size() != n) throw ValidationError("zero_mean_solve: dimension mismatch");
  const double wz = w.dot(z);
  if (!(std::abs(wz) > 0.0)) throw ValidationError("zero_mean_solve: weights orthogonal to the kernel");
  // the multiplier follows from z^T A = 0
  const double lambda = z.dot(rhs) / wz;
  const Eigen::VectorXd b = rhs - lambda * w;

  // if z is really a left null vector, a row where it is largest is redundant
  Eigen::Index pin = 0;
  z.cwiseAbs().maxCoeff(&pin);
  const double scale = std::max(A.nonZeros() ? Eigen::Map<const Eigen::VectorXd>(A.valuePtr(), A.nonZeros()).cwiseAbs().maxCoeff() : 1.0, 1.0);
  std::vector<Triplet> trip;
  trip.reserve(A.nonZeros());
  for (int r = 0; r < n; ++r) {
    if (r == pin) continue;
    for (SpMat::InnerIterator it(A, r); it; ++it) trip.emplace_back(r, static_cast<int>(it.col()), it.value());
  }
  trip.emplace_back(static_cast<int>(pin), static_cast<int>(pin), scale);
  SpMat Ap(n, n);
  Ap.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd bp = b;
  bp[pin] = 0.0;

  Eigen::VectorXd x;
  bool ok = true;
  try {
    x = linear_solve(Ap, bp, kind);
  } catch (const SolverError&) {
    ok = false;
  }
  if (ok) {
    x -= (w.dot(x) / wz) * z;
    const double bn = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
    const double rn = (A * x + lambda * w - rhs).cwiseAbs().maxCoeff();
    ok = std::isfinite(rn) && rn <= 1e-9 * bn;
  }
  if (ok) return x;

  // fall back to the bordered system with an explicit multiplier
  std::vector<Triplet> full;
  full.reserve(A.nonZeros() + 2 * n);
  for (int r = 0; r < n; ++r)
    for (SpMat::InnerIterator it(A, r); it; ++it) full.emplace_back(r, static_cast<int>(it.col()), it.value());
  for (int i = 0; i < n; ++i)
    if (w[i] != 0.0) {
      full.emplace_back(i, n, w[i]);
      full.emplace_back(n, i, w[i]);
    }
  SpMat B(n + 1, n + 1);
  B.setFromTriplets(full.begin(), full.end());
  Eigen::VectorXd rb(n + 1);
  rb << rhs, 0.0;
  return linear_solve(B, rb, kind).head(n);
}

namespace {

std::vector<int> indices_of(const std::vector<std::pair<int, double>>& bc, int offset) {
  std::vector<int> out;
  for (auto& [i, v] : bc) out.push_back(offset + i);
  return out;
}

Eigen::VectorXd psi_with_boundary(const Discretization& disc, const Eigen::VectorXd& psi, const BoundaryData& bc) {
  Eigen::VectorXd out = psi;
  auto trace = bc.potential ? bc.potential : [](Point2) { return 0.0; };
  for (auto& [i, v] : dirichlet_values(disc, trace)) out[i] = v;
  return out;
}

}  // namespace

StokesSolution solve_stokes(const Discretization& disc, const Coefficients& coeffs, const SolverConfig& cfg,
                            const BoundaryData& bc, const Eigen::VectorXd& psi) {
  const int ns = disc.dofs().scalar_size();
  GlobalSystem sys = assemble_stokes(disc, coeffs, cfg.stab, psi);
  std::function<Point2(Point2)> vel = bc.velocity ? bc.velocity : [](Point2) { return Point2{0.0, 0.0}; };
  const auto bx = dirichlet_values(disc, [&](Point2 x) { return vel(x).x; });
  const auto by = dirichlet_values(disc, [&](Point2 x) { return vel(x).y; });
  std::vector<int> constrained = indices_of(bx, 0);
  const auto cy = indices_of(by, ns);
  constrained.insert(constrained.end(), cy.begin(), cy.end());
  Eigen::VectorXd values = Eigen::VectorXd::Zero(sys.A.rows());
  for (auto& [i, v] : bx) values[i] = v;
  for (auto& [i, v] : by) values[ns + i] = v;
  const auto cs = apply_dirichlet(sys.A, sys.rhs, constrained, values);
  // constant pressure: kernel of the reduced operator on both sides
  const Eigen::VectorXd one = interpolate_scalar(disc.mesh(), disc.dofs(), [](Point2) { return 1.0; });
  const Eigen::VectorXd wp = pressure_mean_weights(disc);
  const int nf = static_cast<int>(cs.free.size());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nf), w = Eigen::VectorXd::Zero(nf);
  for (int i = 0; i < nf; ++i)
    if (cs.free[i] >= 2 * ns) {
      z[i] = one[cs.free[i] - 2 * ns];
      w[i] = wp[cs.free[i] - 2 * ns];
    }
  const Eigen::VectorXd full = cs.expand(zero_mean_solve(cs.A, cs.rhs, w, z, cfg.linear_solver));
  return {full.head(2 * ns), full.segment(2 * ns, ns)};
}

PbResult solve_pb_newton(const Discretization& disc, const Coefficients& coeffs, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& psi_init, const SolverConfig& cfg, const BoundaryData& bc) {
  const int ns = disc.dofs().scalar_size();
  const int ne = static_cast<int>(disc.elements().size());
  // linear part and load, fixed during the iteration
  std::vector<Triplet> lin;
  Eigen::VectorXd G = Eigen::VectorXd::Zero(ns);
  std::vector<Eigen::MatrixXd> mass;  // only for the frozen-slope variant
  for (int c = 0; c < ne; ++c) {
    const auto& el = disc.elements()[c];
    const auto& ids = disc.dofs().cell_dofs(c);
    const Eigen::MatrixXd L = a_ph_local(el, coeffs) + c_skew_ph_local(el, disc.gather_vector(c, u));
    const Eigen::VectorXd g = g_h_local(el, coeffs);
    for (int i = 0; i < el.n(); ++i) {
      G[ids[i]] += g[i];
      for (int j = 0; j < el.n(); ++j)
        if (L(i, j) != 0.0) lin.emplace_back(ids[i], ids[j], L(i, j));
    }
  }
  SpMat Lg(ns, ns);
  Lg.setFromTriplets(lin.begin(), lin.end());

  PbResult res;
  res.psi = psi_with_boundary(disc, psi_init, bc);
  std::vector<int> constrained;
  for (int i = 0; i < ns; ++i)
    if (disc.dofs().on_boundary(i)) constrained.push_back(i);
  std::vector<char> is_con(ns, 0);
  for (int i : constrained) is_con[i] = 1;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ns);

  for (int it = 0;; ++it) {
    Eigen::VectorXd R = Lg * res.psi - G;
    std::vector<Triplet> jac;
    if (coeffs.alpha0 != 0.0) {
      for (int c = 0; c < ne; ++c) {
        const auto& el = disc.elements()[c];
        const auto& ids = disc.dofs().cell_dofs(c);
        const Eigen::VectorXd pl = disc.gather(c, res.psi);
        const Eigen::VectorXd d = d_h_local(el, coeffs, pl);
        const Eigen::MatrixXd J = cfg.picard ? d_h_jacobian(el, coeffs, Eigen::VectorXd::Zero(el.n()))
                                             : d_h_jacobian(el, coeffs, pl);
        for (int i = 0; i < el.n(); ++i) {
          R[ids[i]] += d[i];
          for (int j = 0; j < el.n(); ++j) jac.emplace_back(ids[i], ids[j], J(i, j));
        }
      }
    }
    double rn = 0.0;
    for (int i = 0; i < ns; ++i)
      if (!is_con[i]) rn = std::max(rn, std::abs(R[i]));
    res.residuals.push_back(rn);
    if (!std::isfinite(rn)) throw SolverError("potential Newton iteration diverged", res.residuals);
    if (it > 0 && rn <= cfg.newton_tol) {
      res.iterations = it;
      return res;
    }
    if (it == cfg.max_newton) {
      std::ostringstream os;
      os << "potential Newton iteration did not converge in " << cfg.max_newton << " steps (residual " << rn << ")";
      throw SolverError(os.str(), res.residuals);
    }
    SpMat J(ns, ns);
    J.setFromTriplets(jac.begin(), jac.end());
    J += Lg;
    const auto cs = apply_dirichlet(J, -R, constrained, zero);
    res.psi += cs.expand(linear_solve(cs.A, cs.rhs, cfg.linear_solver));
  }
}

double broken_h1_seminorm(const Discretization& disc, const Eigen::VectorXd& v) {
  double s = 0.0;
  for (std::size_t c = 0; c < disc.elements().size(); ++c) {
    const Eigen::VectorXd vl = disc.gather(static_cast<int>(c), v);
    s += vl.dot(disc.elements()[c].K() * vl);
  }
  return std::sqrt(std::max(s, 0.0));
}

double pressure_mean(const Discretization& disc, const Eigen::VectorXd& p) {
  return pressure_mean_weights(disc).dot(p);
}

double divergence_norm(const Discretization& disc, const Eigen::VectorXd& u) {
  double s = 0.0;
  for (std::size_t c = 0; c < disc.elements().size(); ++c) {
    const auto& el = disc.elements()[c];
    const Eigen::VectorXd ul = disc.gather_vector(static_cast<int>(c), u);
    const Eigen::VectorXd div = el.Gr(0) * ul.head(el.n()) + el.Gr(1) * ul.tail(el.n());
    s += el.w().dot(div.cwiseProduct(div));
  }
  return std::sqrt(s);
}

SolutionState coupled_fixed_point(const Discretization& disc, const Coefficients& coeffs, const SolverConfig& cfg,
                                  const BoundaryData& bc) {
  coeffs.validate();
  cfg.validate();
  const int ns = disc.dofs().scalar_size();
  SolutionState st;
  st.psi = psi_with_boundary(disc, Eigen::VectorXd::Zero(ns), bc);
  st.u = Eigen::VectorXd::Zero(2 * ns);
  st.p = Eigen::VectorXd::Zero(ns);
  for (int n = 1; n <= cfg.max_outer; ++n) {
    auto stokes = solve_stokes(disc, coeffs, cfg, bc, st.psi);
    auto pb = solve_pb_newton(disc, coeffs, stokes.u, st.psi, cfg, bc);
    const double dpsi = broken_h1_seminorm(disc, pb.psi - st.psi);
    const double du = (stokes.u - st.u).cwiseAbs().maxCoeff();
    st.u = std::move(stokes.u);
    st.p = std::move(stokes.p);
    st.psi = std::move(pb.psi);
    st.newton_iterations.push_back(pb.iterations);
    st.residual_history.push_back(dpsi + du);
    if (dpsi <= cfg.fixed_point_tol && du <= cfg.fixed_point_tol) {
      st.outer_iterations = n;
      return st;
    }
  }
  std::ostringstream os;
  os << "fixed-point iteration did not converge in " << cfg.max_outer << " outer iterations";
  throw SolverError(os.str(), st.residual_history);
}

}  // namespace spbvem
