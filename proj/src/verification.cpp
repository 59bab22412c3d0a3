#include "spbvem/verification.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "spbvem/error.hpp"

namespace spbvem {

namespace {

constexpr double kPi = std::numbers::pi;

/// Bivariate polynomial as a map from exponents to coefficients.
struct Bivariate {
  std::map<std::pair<int, int>, double> c;

  double operator()(Point2 x) const {
    double s = 0.0;
    for (const auto& [e, v] : c) s += v * std::pow(x.x, e.first) * std::pow(x.y, e.second);
    return s;
  }
  Bivariate dx() const {
    Bivariate out;
    for (const auto& [e, v] : c)
      if (e.first > 0) out.c[{e.first - 1, e.second}] += v * e.first;
    return out;
  }
  Bivariate dy() const {
    Bivariate out;
    for (const auto& [e, v] : c)
      if (e.second > 0) out.c[{e.first, e.second - 1}] += v * e.second;
    return out;
  }
  Bivariate operator+(const Bivariate& o) const {
    Bivariate out = *this;
    for (const auto& [e, v] : o.c) out.c[e] += v;
    return out;
  }
  Bivariate operator*(double s) const {
    Bivariate out = *this;
    for (auto& [e, v] : out.c) v *= s;
    return out;
  }
  /// Mean over the unit square.
  double square_mean() const {
    double s = 0.0;
    for (const auto& [e, v] : c) s += v / ((e.first + 1.0) * (e.second + 1.0));
    return s;
  }
};

/// Fixed full polynomial of the given degree with unequal coefficients.
Bivariate sample_poly(int degree, int salt) {
  Bivariate p;
  if (degree < 0) return p;
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a) {
      const int b = d - a;
      p.c[{a, b}] = 0.35 + 0.25 * ((3 * a + 5 * b + salt) % 7) - 0.12 * (a * b % 3);
    }
  return p;
}

}  // namespace

ManufacturedCase example1_case(Domain domain) {
  ManufacturedCase mc;
  mc.name = "example1";
  mc.domain = domain;
  mc.p0 = domain == Domain::UnitSquare ? 0.0 : 1.0 / (3.0 * kPi);
  // xi = A(x) A(y) with A(t) = s^3, s = t(1-t)
  struct A {
    static double v(double t) { const double s = t * (1 - t); return s * s * s; }
    static double d1(double t) { const double s = t * (1 - t); return 3 * s * s * (1 - 2 * t); }
    static double d2(double t) {
      const double s = t * (1 - t), sp = 1 - 2 * t;
      return 6 * s * sp * sp - 6 * s * s;
    }
    static double d3(double t) {
      const double s = t * (1 - t), sp = 1 - 2 * t;
      return 6 * sp * sp * sp - 36 * s * sp;
    }
  };
  mc.u = [](Point2 x) { return Point2{A::v(x.x) * A::d1(x.y), -A::d1(x.x) * A::v(x.y)}; };
  mc.grad_u = [](Point2 x) {
    return std::array<Point2, 2>{Point2{A::d1(x.x) * A::d1(x.y), A::v(x.x) * A::d2(x.y)},
                                 Point2{-A::d2(x.x) * A::v(x.y), -A::d1(x.x) * A::d1(x.y)}};
  };
  mc.lap_u = [](Point2 x) {
    return Point2{A::d2(x.x) * A::d1(x.y) + A::v(x.x) * A::d3(x.y), -A::d3(x.x) * A::v(x.y) - A::d1(x.x) * A::d2(x.y)};
  };
  const double p0 = mc.p0;
  mc.p = [p0](Point2 x) { return std::sin(kPi * x.x) * std::cos(kPi * x.x) + p0; };
  mc.grad_p = [](Point2 x) { return Point2{kPi * std::cos(2 * kPi * x.x), 0.0}; };
  // psi = C(x) C(y), C(t) = t^2 (t - 1)
  auto C = [](double t) { return t * t * (t - 1); };
  auto C1 = [](double t) { return 3 * t * t - 2 * t; };
  auto C2 = [](double t) { return 6 * t - 2; };
  mc.psi = [=](Point2 x) { return C(x.x) * C(x.y); };
  mc.grad_psi = [=](Point2 x) { return Point2{C1(x.x) * C(x.y), C(x.x) * C1(x.y)}; };
  mc.lap_psi = [=](Point2 x) { return C2(x.x) * C(x.y) + C(x.x) * C2(x.y); };
  return mc;
}

ManufacturedCase patch_case(int k, const std::string& scenario) {
  if (k < 1 || k > 3) throw ValidationError("patch case needs k in {1,2,3}");
  Bivariate stream, pres = sample_poly(k - 1, 2), psi;
  if (scenario == "stokes") {
    stream = sample_poly(k + 1, 1);
  } else if (scenario == "potential") {
    psi = sample_poly(k, 4);
  } else if (scenario == "coupled") {
    stream.c[{1, 0}] = -0.6;  // u = (0.8, 0.6)
    stream.c[{0, 1}] = 0.8;
    psi = sample_poly(k - 1, 4);
  } else {
    throw ValidationError("unknown patch scenario '" + scenario + "'");
  }
  pres.c[{0, 0}] -= pres.square_mean();
  const Bivariate ux = stream.dy(), uy = stream.dx() * -1.0;
  ManufacturedCase mc;
  mc.name = "patch-" + scenario;
  mc.domain = Domain::UnitSquare;
  mc.u = [=](Point2 x) { return Point2{ux(x), uy(x)}; };
  const Bivariate uxx = ux.dx(), uxy = ux.dy(), uyx = uy.dx(), uyy = uy.dy();
  mc.grad_u = [=](Point2 x) { return std::array<Point2, 2>{Point2{uxx(x), uxy(x)}, Point2{uyx(x), uyy(x)}}; };
  const Bivariate lx = uxx.dx() + uxy.dy(), ly = uyx.dx() + uyy.dy();
  mc.lap_u = [=](Point2 x) { return Point2{lx(x), ly(x)}; };
  const Bivariate px = pres.dx(), py = pres.dy();
  mc.p = [=](Point2 x) { return pres(x); };
  mc.grad_p = [=](Point2 x) { return Point2{px(x), py(x)}; };
  const Bivariate sx = psi.dx(), sy = psi.dy(), lap = psi.dx().dx() + psi.dy().dy();
  mc.psi = [=](Point2 x) { return psi(x); };
  mc.grad_psi = [=](Point2 x) { return Point2{sx(x), sy(x)}; };
  mc.lap_psi = [=](Point2 x) { return lap(x); };
  return mc;
}

Loads derive_loads(const ManufacturedCase& mc, const Coefficients& c) {
  Loads l;
  l.f = [mc, c](Point2 x) {
    const Point2 lu = mc.lap_u(x), gp = mc.grad_p(x);
    const double lp = mc.lap_psi(x);
    return Point2{-c.mu * lu.x + gp.x + c.eps * lp * c.E.x, -c.mu * lu.y + gp.y + c.eps * lp * c.E.y};
  };
  l.g = [mc, c](Point2 x) { return -c.eps * mc.lap_psi(x) + dot(mc.u(x), mc.grad_psi(x)) + c.kappa(mc.psi(x)); };
  return l;
}

Coefficients with_loads(Coefficients coeffs, const ManufacturedCase& mc) {
  auto l = derive_loads(mc, coeffs);
  coeffs.f = std::move(l.f);
  coeffs.g = std::move(l.g);
  return coeffs;
}

BoundaryData boundary_data(const ManufacturedCase& mc) { return {mc.u, mc.psi}; }

ErrorNorms error_norms(const Discretization& disc, const SolutionState& st, const ManufacturedCase& mc) {
  const int k = disc.k();
  const int ns = disc.dofs().scalar_size();
  double eu = 0.0, ep = 0.0, epsi = 0.0;
  for (std::size_t c = 0; c < disc.elements().size(); ++c) {
    const int cell = static_cast<int>(c);
    const auto& ws = disc.elements()[c].workspace();
    const auto& P = ws.projectors();
    const auto q = polygon_quadrature(ws.vertices(), 2 * k + 4, cell);
    const Eigen::VectorXd ux = P.Pnab * disc.gather(cell, st.u.head(ns));
    const Eigen::VectorXd uy = P.Pnab * disc.gather(cell, st.u.tail(ns));
    const Eigen::VectorXd ph = P.P0 * disc.gather(cell, st.p);
    const Eigen::VectorXd sh = P.Pnab * disc.gather(cell, st.psi);
    const int dim = ws.basis().size();
    std::vector<double> v(dim), dx(dim), dy(dim);
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const Point2 x = q.points[i];
      ws.basis().values(x, v);
      ws.basis().gradients(x, dx, dy);
      const auto V = Eigen::VectorXd::Map(v.data(), dim);
      const auto DX = Eigen::VectorXd::Map(dx.data(), dim), DY = Eigen::VectorXd::Map(dy.data(), dim);
      const auto gu = mc.grad_u(x);
      const Point2 gs = mc.grad_psi(x);
      const double a = gu[0].x - DX.dot(ux), b = gu[0].y - DY.dot(ux);
      const double cc = gu[1].x - DX.dot(uy), d = gu[1].y - DY.dot(uy);
      eu += q.weights[i] * (a * a + b * b + cc * cc + d * d);
      const double e = mc.p(x) - V.dot(ph);
      ep += q.weights[i] * e * e;
      const double f = gs.x - DX.dot(sh), g = gs.y - DY.dot(sh);
      epsi += q.weights[i] * (f * f + g * g);
    }
  }
  return {std::sqrt(eu), std::sqrt(ep), std::sqrt(epsi)};
}

std::optional<double> observed_rate(double e0, double e1, double h0, double h1) {
  if (!(e0 > 0.0) || !(e1 > 0.0) || !(h0 > 0.0) || !(h1 > 0.0) || h0 == h1) return std::nullopt;
  if (!std::isfinite(e0) || !std::isfinite(e1)) return std::nullopt;
  return std::log(e0 / e1) / std::log(h0 / h1);
}

void convergence_rates(ConvergenceTable& t) {
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    auto& r = t.rows[i];
    r.rate_u = r.rate_p = r.rate_psi = std::nullopt;
    if (i == 0) continue;
    const auto& q = t.rows[i - 1];
    if (!q.failure.empty() || !r.failure.empty()) continue;
    r.rate_u = observed_rate(q.err.E_u, r.err.E_u, q.h, r.h);
    r.rate_p = observed_rate(q.err.E_p, r.err.E_p, q.h, r.h);
    r.rate_psi = observed_rate(q.err.E_psi, r.err.E_psi, q.h, r.h);
  }
}

std::string to_csv(const ConvergenceTable& t) {
  std::ostringstream os;
  os << "h,E^u,rate,E^p,rate,E^psi,rate,itr\n";
  auto sci = [](double v) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(5) << v;
    return s.str();
  };
  auto rate = [](const std::optional<double>& r) {
    if (!r) return std::string();
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << *r;
    return s.str();
  };
  for (const auto& r : t.rows) {
    if (!r.failure.empty()) {
      os << sci(r.h) << ",,,,,,,\n";
      continue;
    }
    os << sci(r.h) << ',' << sci(r.err.E_u) << ',' << rate(r.rate_u) << ',' << sci(r.err.E_p) << ','
       << rate(r.rate_p) << ',' << sci(r.err.E_psi) << ',' << rate(r.rate_psi) << ',' << r.outer_iterations << '\n';
  }
  return os.str();
}

MeshFamily parse_family(const std::string& s) {
  if (s == "hex" || s == "omega1") return MeshFamily::Hex;
  if (s == "nonconvex" || s == "omega2") return MeshFamily::NonConvex;
  if (s == "voronoi" || s == "omega3") return MeshFamily::Voronoi;
  if (s == "composite" || s == "omega4") return MeshFamily::Composite;
  if (s == "structured" || s == "quad") return MeshFamily::Structured;
  throw ValidationError("unknown mesh family '" + s + "' (hex, nonconvex, voronoi, composite, structured)");
}

std::string to_string(MeshFamily f) {
  switch (f) {
    case MeshFamily::Hex: return "hex";
    case MeshFamily::NonConvex: return "nonconvex";
    case MeshFamily::Voronoi: return "voronoi";
    case MeshFamily::Composite: return "composite";
    case MeshFamily::Structured: return "structured";
  }
  return "?";
}

PolygonalMesh family_mesh(MeshFamily family, Domain domain, int n, const FamilyParams& prm) {
  if (domain == Domain::LShape && family != MeshFamily::Voronoi && family != MeshFamily::Structured)
    throw ValidationError("the L-shaped domain supports the voronoi and structured families only");
  switch (family) {
    case MeshFamily::Hex: return generate_distorted_hex(n, prm.distortion, prm.seed);
    case MeshFamily::NonConvex: return jitter_vertices(generate_nonconvex(n), prm.jitter, prm.seed);
    case MeshFamily::Voronoi: return generate_voronoi(domain, n, prm.lloyd_iters, prm.seed);
    case MeshFamily::Composite:
      // the interface stays straight so its fine vertices remain hanging nodes
      return jitter_vertices(generate_composite_hanging(n, prm.fine_ratio * n), prm.jitter, prm.seed,
                             [](Point2 x) { return std::abs(x.x - 0.5) < 1e-12; });
    case MeshFamily::Structured: return generate_structured(domain, n);
  }
  throw ValidationError("unknown mesh family");
}

ConvergenceTable run_convergence(const StudyConfig& cfg, const std::function<void(const ConvergenceRow&)>& progress) {
  if (cfg.n_values.empty()) throw ValidationError("empty N list");
  cfg.coeffs.validate();
  cfg.solver.validate();
  const ManufacturedCase mc = example1_case(cfg.domain);
  const Coefficients coeffs = with_loads(cfg.coeffs, mc);
  const BoundaryData bc = boundary_data(mc);
  ConvergenceTable table;
  table.k = cfg.k;
  for (int n : cfg.n_values) {
    ConvergenceRow row;
    row.n = n;
    row.h = 1.0 / n;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Discretization disc(family_mesh(cfg.family, cfg.domain, n, cfg.mesh), cfg.k);
      row.n_cells = static_cast<int>(disc.mesh().num_cells());
      row.n_dofs = disc.dofs().total_dofs();
      const SolutionState st = coupled_fixed_point(disc, coeffs, cfg.solver, bc);
      row.err = error_norms(disc, st, mc);
      row.outer_iterations = st.outer_iterations;
      for (int it : st.newton_iterations) row.newton_iterations += it;
      row.divergence = divergence_norm(disc, st.u);
      row.pressure_mean = pressure_mean(disc, st.p);
    } catch (const SolverError& e) {
      row.failure = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    table.rows.push_back(row);
    convergence_rates(table);
    if (progress) progress(table.rows.back());
  }
  return table;
}

}  // namespace spbvem
