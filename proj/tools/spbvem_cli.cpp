// spbvem: mesh generation, convergence studies and single solves from the
// command line. Every run writes <output>/run.json.
//
// exit codes: 0 ok, 2 invalid input, 3 solver did not converge, 1 other

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <vector>

#include "CLI11.hpp"
#include "spbvem/error.hpp"
#include "spbvem/io.hpp"
#include "spbvem/regularity.hpp"

using namespace spbvem;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

using Override = std::function<void(RunConfig&)>;

// CLI values are applied after the config file so flags win
template <typename T, typename F>
void override_option(CLI::App* app, std::vector<Override>& out, const std::string& name, const std::string& help,
                     F apply) {
  app->add_option_function<T>(
      name, [&out, apply](const T& v) { out.push_back([v, apply](RunConfig& c) { apply(c, v); }); }, help);
}

void mesh_options(CLI::App* s, std::vector<Override>& ov) {
  override_option<std::string>(s, ov, "--family", "hex | nonconvex | voronoi | composite | structured",
                               [](RunConfig& c, const std::string& v) { c.family = parse_family(v); });
  override_option<std::string>(s, ov, "--domain", "square | lshape",
                               [](RunConfig& c, const std::string& v) { c.domain = parse_domain(v); });
  override_option<std::uint64_t>(s, ov, "--seed", "mesh seed",
                                 [](RunConfig& c, std::uint64_t v) { c.mesh.seed = v; });
  override_option<double>(s, ov, "--distortion", "hex vertex shift as a fraction of h",
                          [](RunConfig& c, double v) { c.mesh.distortion = v; });
  override_option<double>(s, ov, "--jitter", "nonconvex/composite vertex shift (fraction of shortest edge)",
                          [](RunConfig& c, double v) { c.mesh.jitter = v; });
  override_option<int>(s, ov, "--lloyd", "Lloyd iterations (voronoi)",
                       [](RunConfig& c, int v) { c.mesh.lloyd_iters = v; });
  override_option<int>(s, ov, "--fine-ratio", "composite: fine rows per coarse row",
                       [](RunConfig& c, int v) { c.mesh.fine_ratio = v; });
  override_option<std::string>(s, ov, "-o,--output", "output directory",
                               [](RunConfig& c, const std::string& v) { c.output_dir = v; });
}

void solver_options(CLI::App* s, std::vector<Override>& ov) {
  override_option<int>(s, ov, "-k,--order", "polynomial order 1..3", [](RunConfig& c, int v) { c.k = v; });
  override_option<double>(s, ov, "--mu", "viscosity", [](RunConfig& c, double v) { c.coeffs.mu = v; });
  override_option<double>(s, ov, "--eps", "permittivity", [](RunConfig& c, double v) { c.coeffs.eps = v; });
  override_option<double>(s, ov, "--alpha0", "sinh amplitude", [](RunConfig& c, double v) { c.coeffs.alpha0 = v; });
  override_option<double>(s, ov, "--alpha1", "sinh rate", [](RunConfig& c, double v) { c.coeffs.alpha1 = v; });
  override_option<double>(s, ov, "--c-tau", "PSPG constant, tau = c_tau h^2",
                          [](RunConfig& c, double v) { c.solver.stab.c_tau = v; });
  override_option<double>(s, ov, "--c-delta", "grad-div constant, delta = c_delta h",
                          [](RunConfig& c, double v) { c.solver.stab.c_delta = v; });
  override_option<double>(s, ov, "--tol", "fixed-point tolerance",
                          [](RunConfig& c, double v) { c.solver.fixed_point_tol = v; });
  override_option<int>(s, ov, "--max-outer", "fixed-point iteration cap",
                       [](RunConfig& c, int v) { c.solver.max_outer = v; });
  s->add_flag_function(
      "--picard", [&ov](std::int64_t) { ov.push_back([](RunConfig& c) { c.solver.picard = true; }); },
      "frozen-slope iteration for the potential instead of Newton");
  s->add_flag_function(
      "--iterative", [&ov](std::int64_t) { ov.push_back([](RunConfig& c) { c.solver.linear_solver = LinearSolverKind::Iterative; }); },
      "BiCGSTAB instead of the sparse direct solver");
}

RunConfig load_config(const std::string& path, RunConfig base, const std::vector<Override>& ov) {
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open config " + path);
    Json j;
    try {
      j = Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config " + path + ": " + e.what());
    }
    base = run_config_from_json(j, base);
  }
  for (const auto& f : ov) f(base);
  base.validate();
  return base;
}

int cmd_mesh(const RunConfig& cfg, const std::string& out_file) {
  if (cfg.n_values.size() != 1) throw ValidationError("mesh takes a single --n");
  const PolygonalMesh mesh = cfg.build_mesh(cfg.n_values.front());
  const fs::path out = out_file.empty() ? fs::path(cfg.output_dir) / "mesh.json" : fs::path(out_file);
  write_mesh(out, mesh);
  const auto reg = check_regularity(mesh, 0.1);
  std::cout << out.string() << ": " << mesh.num_cells() << " cells, " << mesh.num_vertices() << " vertices, h = "
            << mesh.h() << '\n';
  write_run_record(cfg.output_dir, "mesh", cfg,
                   {{"mesh", out.string()},
                    {"cells", mesh.num_cells()},
                    {"vertices", mesh.num_vertices()},
                    {"edges", mesh.num_edges()},
                    {"h", mesh.h()},
                    {"delta0_star_shaped", reg.delta0_star_shaped},
                    {"delta0_edge", reg.delta0_edge}});
  return kExitOk;
}

int cmd_convergence(const RunConfig& cfg) {
  const ConvergenceTable t = run_convergence(cfg.study(), [](const ConvergenceRow& r) {
    std::cerr << "N=" << r.n << " cells=" << r.n_cells << " dofs=" << r.n_dofs;
    if (r.failure.empty())
      std::cerr << " itr=" << r.outer_iterations << " (" << r.seconds << " s)\n";
    else
      std::cerr << " FAILED: " << r.failure << '\n';
  });
  const std::string csv = to_csv(t);
  const fs::path out = fs::path(cfg.output_dir) / "convergence.csv";
  std::ofstream(out) << csv;
  const RateSummary s = rate_summary(t, cfg.rate_tol);
  std::cout << csv << s.line << '\n';
  Json res = to_json(t);
  res["csv"] = out.string();
  res["summary"] = s.line;
  res["rates_pass"] = s.pass;
  write_run_record(cfg.output_dir, "convergence", cfg, res);
  for (const auto& r : t.rows)
    if (!r.failure.empty()) return kExitSolver;
  return kExitOk;
}

int cmd_solve(const RunConfig& cfg) {
  if (cfg.n_values.size() != 1) throw ValidationError("solve takes a single --n");
  const ManufacturedCase mc = example1_case(cfg.domain);
  const Discretization disc(cfg.build_mesh(cfg.n_values.front()), cfg.k);
  const fs::path dir(cfg.output_dir);
  Json res{{"cells", disc.mesh().num_cells()}, {"dofs", disc.dofs().total_dofs()}};
  SolutionState st;
  try {
    st = coupled_fixed_point(disc, with_loads(cfg.coeffs, mc), cfg.solver, boundary_data(mc));
  } catch (const SolverError& e) {
    res["failure"] = e.what();
    res["residual_history"] = e.history();
    write_run_record(dir, "solve", cfg, res);
    throw;
  }
  const ErrorNorms err = error_norms(disc, st, mc);
  write_mesh(dir / "mesh.json", disc.mesh());
  write_vtk(dir / "solution.vtk", disc.mesh(), vertex_fields(disc, st));
  res["E_u"] = err.E_u;
  res["E_p"] = err.E_p;
  res["E_psi"] = err.E_psi;
  res["outer_iterations"] = st.outer_iterations;
  res["newton_iterations"] = st.newton_iterations;
  res["residual_history"] = st.residual_history;
  res["divergence"] = divergence_norm(disc, st.u);
  res["pressure_mean"] = pressure_mean(disc, st.p);
  res["vtk"] = (dir / "solution.vtk").string();
  write_run_record(dir, "solve", cfg, res);
  std::cout << std::scientific << "E_u = " << err.E_u << "  E_p = " << err.E_p << "  E_psi = " << err.E_psi
            << "  itr = " << st.outer_iterations << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equal-order stabilized virtual elements for Stokes coupled to Poisson-Boltzmann"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPBVEM_VERSION);

  std::vector<Override> ov;
  std::string config_path, mesh_out;
  std::vector<int> ns;

  auto* mesh = app.add_subcommand("mesh", "generate a mesh and write it as JSON");
  mesh->add_option("--config", config_path, "JSON run configuration");
  mesh_options(mesh, ov);
  mesh->add_option("--n", ns, "resolution N (h = 1/N)")->expected(1);
  override_option<int>(mesh, ov, "--coarse", "composite: rows of the coarse half",
                       [](RunConfig& c, int v) { c.coarse = v; });
  override_option<int>(mesh, ov, "--fine", "composite: rows of the fine half",
                       [](RunConfig& c, int v) { c.fine = v; });
  mesh->add_option("--out", mesh_out, "mesh file (default <output>/mesh.json)");

  auto* conv = app.add_subcommand("convergence", "Example-1 convergence study over a list of N");
  conv->add_option("--config", config_path, "JSON run configuration");
  mesh_options(conv, ov);
  solver_options(conv, ov);
  conv->add_option("--n", ns, "resolutions, e.g. --n 5 10 20 40");
  override_option<double>(conv, ov, "--rate-tol", "accepted distance of the finest-pair rates from k",
                          [](RunConfig& c, double v) { c.rate_tol = v; });

  auto* solve = app.add_subcommand("solve", "one Example-1 solve with VTK output");
  solve->add_option("--config", config_path, "JSON run configuration");
  mesh_options(solve, ov);
  solver_options(solve, ov);
  solve->add_option("--n", ns, "resolution N")->expected(1);
  override_option<std::string>(solve, ov, "--mesh", "mesh JSON file instead of a generated family",
                               [](RunConfig& c, const std::string& v) { c.mesh_file = v; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  const bool single = !conv->parsed();
  try {
    RunConfig base;
    if (single) base.n_values = {10};
    if (!ns.empty()) ov.push_back([ns](RunConfig& c) { c.n_values = ns; });
    const RunConfig cfg = load_config(config_path, base, ov);
    fs::create_directories(cfg.output_dir);
    if (mesh->parsed()) return cmd_mesh(cfg, mesh_out);
    if (conv->parsed()) return cmd_convergence(cfg);
    return cmd_solve(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const GeometryError& e) {
    std::cerr << "invalid mesh: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SolverError& e) {
    std::cerr << "solver did not converge: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}
