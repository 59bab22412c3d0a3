#include "spbvem/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "spbvem/error.hpp"

namespace spbvem {

namespace fs = std::filesystem;

Json mesh_to_json(const PolygonalMesh& mesh) {
  Json verts = Json::array(), cells = Json::array(), tags = Json::array();
  for (const Point2& p : mesh.vertices()) verts.push_back({p.x, p.y});
  for (const auto& poly : mesh.polygons()) cells.push_back(poly.vertex_ids);
  for (int e : mesh.boundary_edges()) {
    const Edge& ed = mesh.edges()[e];
    tags.push_back({ed.v[0], ed.v[1], ed.boundary_tag});
  }
  return Json{{"vertices", verts}, {"cells", cells}, {"boundary_tags", tags}};
}

PolygonalMesh mesh_from_json(const Json& j) {
  std::vector<Point2> verts;
  std::vector<std::vector<int>> cells;
  std::map<std::pair<int, int>, int> tag_of;
  try {
    for (const auto& v : j.at("vertices")) {
      if (!v.is_array() || v.size() != 2) throw ValidationError("mesh vertex must be [x, y]");
      verts.push_back({v[0].get<double>(), v[1].get<double>()});
      if (!std::isfinite(verts.back().x) || !std::isfinite(verts.back().y))
        throw ValidationError("mesh vertex with non-finite coordinate");
    }
    const int nv = static_cast<int>(verts.size());
    for (const auto& c : j.at("cells")) {
      cells.push_back(c.get<std::vector<int>>());
      for (int id : cells.back())
        if (id < 0 || id >= nv) throw ValidationError("cell " + std::to_string(cells.size() - 1) + " refers to vertex " +
                                                      std::to_string(id) + " out of range");
    }
    if (j.contains("boundary_tags"))
      for (const auto& t : j.at("boundary_tags")) {
        if (!t.is_array() || t.size() != 3) throw ValidationError("boundary tag must be [v0, v1, tag]");
        const int a = t[0].get<int>(), b = t[1].get<int>();
        tag_of[{std::min(a, b), std::max(a, b)}] = t[2].get<int>();
      }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed mesh JSON: ") + e.what());
  }
  PolygonalMesh plain(verts, cells);
  if (tag_of.empty()) return plain;
  std::vector<int> tags;
  for (int e : plain.boundary_edges()) {
    const Edge& ed = plain.edges()[e];
    const auto it = tag_of.find({ed.v[0], ed.v[1]});
    if (it == tag_of.end())
      throw ValidationError("boundary edge (" + std::to_string(ed.v[0]) + ", " + std::to_string(ed.v[1]) +
                            ") has no tag");
    tags.push_back(it->second);
  }
  if (tags.size() != tag_of.size()) throw ValidationError("boundary_tags lists edges that are not on the boundary");
  return PolygonalMesh(std::move(verts), std::move(cells), std::move(tags));
}

void write_mesh(const fs::path& path, const PolygonalMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << mesh_to_json(mesh).dump(1) << '\n';
  if (!os) throw Error("write failed: " + path.string());
}

PolygonalMesh read_mesh(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open mesh file " + path.string());
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("mesh file " + path.string() + ": " + e.what());
  }
  return mesh_from_json(j);
}

VertexFields vertex_fields(const Discretization& disc, const SolutionState& st) {
  const auto& mesh = disc.mesh();
  const std::size_t nv = mesh.num_vertices();
  VertexFields f;
  f.speed.assign(nv, 0.0);
  f.pressure.assign(nv, 0.0);
  f.potential.assign(nv, 0.0);
  std::vector<int> count(nv, 0);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const int cell = static_cast<int>(c);
    const auto& ws = disc.elements()[c].workspace();
    const auto& proj = ws.projectors();
    const int n = ws.n_dofs();
    const Eigen::VectorXd uv = disc.gather_vector(cell, st.u);
    const Eigen::VectorXd ux = proj.Pnab * uv.head(n), uy = proj.Pnab * uv.tail(n);
    const Eigen::VectorXd pc = proj.P0 * disc.gather(cell, st.p);
    const Eigen::VectorXd psi = disc.gather(cell, st.psi);
    std::vector<double> m(ws.basis().size());
    const auto& ids = mesh.polygons()[c].vertex_ids;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      ws.basis().values(ws.vertices()[i], m);
      const Eigen::Map<const Eigen::VectorXd> mv(m.data(), static_cast<Eigen::Index>(m.size()));
      const int v = ids[i];
      f.speed[v] += std::hypot(mv.dot(ux), mv.dot(uy));
      f.pressure[v] += mv.dot(pc);
      f.potential[v] = psi[static_cast<Eigen::Index>(i)];
      ++count[v];
    }
  }
  for (std::size_t v = 0; v < nv; ++v)
    if (count[v] > 0) {
      f.speed[v] /= count[v];
      f.pressure[v] /= count[v];
    }
  return f;
}

void write_vtk(std::ostream& os, const PolygonalMesh& mesh, const VertexFields& f, const std::string& title) {
  const std::size_t nv = mesh.num_vertices(), nc = mesh.num_cells();
  if (f.speed.size() != nv || f.pressure.size() != nv || f.potential.size() != nv)
    throw ValidationError("vertex field length does not match the mesh");
  std::size_t conn = 0;
  for (const auto& p : mesh.polygons()) conn += p.vertex_ids.size() + 1;
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(12);
  os << "POINTS " << nv << " double\n";
  for (const Point2& p : mesh.vertices()) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << nc << ' ' << conn << '\n';
  for (const auto& p : mesh.polygons()) {
    os << p.vertex_ids.size();
    for (int id : p.vertex_ids) os << ' ' << id;
    os << '\n';
  }
  os << "CELL_TYPES " << nc << '\n';
  for (std::size_t c = 0; c < nc; ++c) os << "7\n";
  os << "POINT_DATA " << nv << '\n';
  auto scalars = [&](const char* name, const std::vector<double>& v) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) os << x << '\n';
  };
  scalars("velocity_magnitude", f.speed);
  scalars("pressure", f.pressure);
  scalars("potential", f.potential);
}

void write_vtk(const fs::path& path, const PolygonalMesh& mesh, const VertexFields& f) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_vtk(os, mesh, f);
  if (!os) throw Error("write failed: " + path.string());
}

// ---- run configuration

void RunConfig::validate() const {
  if (k < 1 || k > 3) throw ValidationError("k must be 1, 2 or 3");
  if (n_values.empty()) throw ValidationError("empty N list");
  for (int n : n_values)
    if (n < 1) throw ValidationError("N must be positive");
  if (domain == Domain::LShape && family != MeshFamily::Voronoi && family != MeshFamily::Structured)
    throw ValidationError("the L-shaped domain supports the voronoi and structured families only");
  if (domain == Domain::LShape)
    for (int n : n_values)
      if (n % 2) throw ValidationError("the L-shaped domain needs even N");
  if (mesh.distortion < 0.0 || mesh.distortion > 0.3) throw ValidationError("distortion must lie in [0, 0.3]");
  if (mesh.jitter < 0.0 || mesh.jitter >= 0.5) throw ValidationError("jitter must lie in [0, 0.5)");
  if (mesh.lloyd_iters < 0) throw ValidationError("lloyd_iters must be non-negative");
  if (mesh.fine_ratio < 1) throw ValidationError("fine_ratio must be at least 1");
  if ((coarse > 0) != (fine > 0)) throw ValidationError("coarse and fine must be given together");
  if (coarse > 0 && family != MeshFamily::Composite) throw ValidationError("coarse/fine apply to the composite family");
  if (coarse > 0 && fine % coarse) throw ValidationError("fine must be a multiple of coarse");
  if (!(rate_tol > 0.0)) throw ValidationError("rate_tol must be positive");
  coeffs.validate();
  solver.validate();
}

StudyConfig RunConfig::study() const {
  StudyConfig s;
  s.family = family;
  s.domain = domain;
  s.n_values = n_values;
  s.k = k;
  s.mesh = mesh;
  s.coeffs = coeffs;
  s.solver = solver;
  return s;
}

PolygonalMesh RunConfig::build_mesh(int n) const {
  if (!mesh_file.empty()) return read_mesh(mesh_file);
  if (coarse > 0) return generate_composite_hanging(coarse, fine);
  return family_mesh(family, domain, n, mesh);
}

namespace {

std::string to_string(PressureStab p) { return p == PressureStab::Mixed ? "mixed" : "full"; }

PressureStab parse_pressure_stab(const std::string& s) {
  if (s == "mixed") return PressureStab::Mixed;
  if (s == "full") return PressureStab::Full;
  throw ValidationError("pressure stabilizer must be 'mixed' or 'full'");
}

void check_keys(const Json& j, const char* where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ValidationError(std::string("unknown key '") + key + "' in " + where);
}

template <typename T>
void take(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const Json& j, RunConfig c) {
  try {
    check_keys(j, "config",
               {"family", "domain", "n", "k", "mesh", "coefficients", "stab", "solver", "rate_tol", "output"});
    if (j.contains("family")) c.family = parse_family(j.at("family").get<std::string>());
    if (j.contains("domain")) c.domain = parse_domain(j.at("domain").get<std::string>());
    if (j.contains("n")) {
      const Json& n = j.at("n");
      c.n_values = n.is_array() ? n.get<std::vector<int>>() : std::vector<int>{n.get<int>()};
    }
    take(j, "k", c.k);
    take(j, "rate_tol", c.rate_tol);
    take(j, "output", c.output_dir);
    if (j.contains("mesh")) {
      const Json& m = j.at("mesh");
      check_keys(m, "mesh", {"seed", "distortion", "lloyd_iters", "fine_ratio", "jitter", "coarse", "fine", "file"});
      take(m, "seed", c.mesh.seed);
      take(m, "distortion", c.mesh.distortion);
      take(m, "lloyd_iters", c.mesh.lloyd_iters);
      take(m, "fine_ratio", c.mesh.fine_ratio);
      take(m, "jitter", c.mesh.jitter);
      take(m, "coarse", c.coarse);
      take(m, "fine", c.fine);
      take(m, "file", c.mesh_file);
    }
    if (j.contains("coefficients")) {
      const Json& m = j.at("coefficients");
      check_keys(m, "coefficients", {"mu", "eps", "alpha0", "alpha1", "E"});
      take(m, "mu", c.coeffs.mu);
      take(m, "eps", c.coeffs.eps);
      take(m, "alpha0", c.coeffs.alpha0);
      take(m, "alpha1", c.coeffs.alpha1);
      if (m.contains("E")) {
        const auto e = m.at("E").get<std::vector<double>>();
        if (e.size() != 2) throw ValidationError("E must have two components");
        c.coeffs.E = {e[0], e[1]};
      }
    }
    if (j.contains("stab")) {
      const Json& m = j.at("stab");
      check_keys(m, "stab", {"c_tau", "c_delta", "pressure"});
      take(m, "c_tau", c.solver.stab.c_tau);
      take(m, "c_delta", c.solver.stab.c_delta);
      if (m.contains("pressure")) c.solver.stab.pressure = parse_pressure_stab(m.at("pressure").get<std::string>());
    }
    if (j.contains("solver")) {
      const Json& m = j.at("solver");
      check_keys(m, "solver",
                 {"fixed_point_tol", "max_outer", "newton_tol", "max_newton", "linear_solver", "picard"});
      take(m, "fixed_point_tol", c.solver.fixed_point_tol);
      take(m, "max_outer", c.solver.max_outer);
      take(m, "newton_tol", c.solver.newton_tol);
      take(m, "max_newton", c.solver.max_newton);
      take(m, "picard", c.solver.picard);
      if (m.contains("linear_solver")) {
        const auto s = m.at("linear_solver").get<std::string>();
        if (s == "direct")
          c.solver.linear_solver = LinearSolverKind::Direct;
        else if (s == "iterative")
          c.solver.linear_solver = LinearSolverKind::Iterative;
        else
          throw ValidationError("linear_solver must be 'direct' or 'iterative'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
  return c;
}

Json to_json(const RunConfig& c) {
  return Json{
      {"family", to_string(c.family)},
      {"domain", to_string(c.domain)},
      {"n", c.n_values},
      {"k", c.k},
      {"mesh",
       {{"seed", c.mesh.seed},
        {"distortion", c.mesh.distortion},
        {"lloyd_iters", c.mesh.lloyd_iters},
        {"fine_ratio", c.mesh.fine_ratio},
        {"jitter", c.mesh.jitter},
        {"coarse", c.coarse},
        {"fine", c.fine},
        {"file", c.mesh_file}}},
      {"coefficients",
       {{"mu", c.coeffs.mu},
        {"eps", c.coeffs.eps},
        {"alpha0", c.coeffs.alpha0},
        {"alpha1", c.coeffs.alpha1},
        {"E", {c.coeffs.E.x, c.coeffs.E.y}}}},
      {"stab",
       {{"c_tau", c.solver.stab.c_tau},
        {"c_delta", c.solver.stab.c_delta},
        {"pressure", to_string(c.solver.stab.pressure)}}},
      {"solver",
       {{"fixed_point_tol", c.solver.fixed_point_tol},
        {"max_outer", c.solver.max_outer},
        {"newton_tol", c.solver.newton_tol},
        {"max_newton", c.solver.max_newton},
        {"linear_solver", c.solver.linear_solver == LinearSolverKind::Direct ? "direct" : "iterative"},
        {"picard", c.solver.picard}}},
      {"rate_tol", c.rate_tol},
      {"output", c.output_dir},
  };
}

Json to_json(const ConvergenceTable& t) {
  Json rows = Json::array();
  auto opt = [](const std::optional<double>& r) { return r ? Json(*r) : Json(nullptr); };
  for (const auto& r : t.rows) {
    Json row{{"n", r.n},
             {"h", r.h},
             {"cells", r.n_cells},
             {"dofs", r.n_dofs},
             {"seconds", r.seconds}};
    if (!r.failure.empty()) {
      row["failure"] = r.failure;
    } else {
      row["E_u"] = r.err.E_u;
      row["E_p"] = r.err.E_p;
      row["E_psi"] = r.err.E_psi;
      row["rate_u"] = opt(r.rate_u);
      row["rate_p"] = opt(r.rate_p);
      row["rate_psi"] = opt(r.rate_psi);
      row["outer_iterations"] = r.outer_iterations;
      row["newton_iterations"] = r.newton_iterations;
      row["divergence"] = r.divergence;
      row["pressure_mean"] = r.pressure_mean;
    }
    rows.push_back(row);
  }
  return Json{{"k", t.k}, {"rows", rows}};
}

RateSummary rate_summary(const ConvergenceTable& t, double tol) {
  RateSummary s;
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  const auto& last = t.rows.empty() ? ConvergenceRow{} : t.rows.back();
  if (t.rows.size() < 2 || !last.rate_u || !last.rate_p || !last.rate_psi) {
    os << "FAIL: no finest-pair rates (need two solved rows)";
    s.line = os.str();
    return s;
  }
  const double r[3] = {*last.rate_u, *last.rate_p, *last.rate_psi};
  s.pass = true;
  for (double x : r) s.pass = s.pass && std::abs(x - t.k) <= tol;
  os << (s.pass ? "PASS" : "FAIL") << ": finest-pair rates u " << r[0] << ", p " << r[1] << ", psi " << r[2]
     << " (expected " << t.k << " +- " << tol << ")";
  s.line = os.str();
  return s;
}

void write_run_record(const fs::path& dir, const std::string& command, const RunConfig& cfg, const Json& results) {
  const Json rec{{"command", command},
                 {"version", SPBVEM_VERSION},
                 {"sparse_lu", direct_solver_name()},
                 {"seed", cfg.mesh.seed},
                 {"config", to_json(cfg)},
                 {"results", results}};
  std::ofstream os(dir / "run.json");
  if (!os) throw Error("cannot write " + (dir / "run.json").string());
  os << rec.dump(2) << '\n';
}

}  // namespace spbvem
