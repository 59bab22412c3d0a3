#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spbvem/error.hpp"
#include "spbvem/io.hpp"
#include "spbvem/regularity.hpp"

namespace py = pybind11;
using namespace spbvem;

namespace {

Eigen::MatrixX2d vertex_array(const PolygonalMesh& m) {
  Eigen::MatrixX2d v(m.num_vertices(), 2);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) v.row(i) << m.vertices()[i].x, m.vertices()[i].y;
  return v;
}

std::vector<std::vector<int>> cell_lists(const PolygonalMesh& m) {
  std::vector<std::vector<int>> c;
  for (const auto& p : m.polygons()) c.push_back(p.vertex_ids);
  return c;
}

// config dict in the same layout as the CLI JSON
RunConfig config_from(const py::dict& d) {
  const auto json = py::module_::import("json");
  RunConfig c = run_config_from_json(Json::parse(py::str(json.attr("dumps")(d)).cast<std::string>()));
  c.validate();
  return c;
}

py::object to_py(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Equal-order stabilized virtual elements for Stokes coupled to Poisson-Boltzmann";
  m.attr("__version__") = SPBVEM_VERSION;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<PolygonalMesh>(m, "Mesh")
      .def(py::init([](const Eigen::MatrixX2d& v, const std::vector<std::vector<int>>& cells) {
             std::vector<Point2> pts;
             for (Eigen::Index i = 0; i < v.rows(); ++i) pts.push_back({v(i, 0), v(i, 1)});
             return PolygonalMesh(std::move(pts), cells);
           }),
           py::arg("vertices"), py::arg("cells"))
      .def_property_readonly("vertices", &vertex_array)
      .def_property_readonly("cells", &cell_lists)
      .def_property_readonly("num_cells", &PolygonalMesh::num_cells)
      .def_property_readonly("num_vertices", &PolygonalMesh::num_vertices)
      .def_property_readonly("num_edges", &PolygonalMesh::num_edges)
      .def_property_readonly("h", &PolygonalMesh::h)
      .def_property_readonly("area", &PolygonalMesh::total_area)
      .def("to_json", [](const PolygonalMesh& mesh) { return mesh_to_json(mesh).dump(); })
      .def_static("from_json", [](const std::string& s) { return mesh_from_json(Json::parse(s)); })
      .def("regularity",
           [](const PolygonalMesh& mesh, double delta0) {
             const auto r = check_regularity(mesh, delta0);
             return py::dict(py::arg("delta0_star_shaped") = r.delta0_star_shaped,
                             py::arg("delta0_edge") = r.delta0_edge, py::arg("worst_element") = r.worst_element_id,
                             py::arg("passed") = r.passed);
           },
           py::arg("delta0") = 0.1)
      .def("__eq__", [](const PolygonalMesh& a, const PolygonalMesh& b) { return a == b; })
      .def("__repr__", [](const PolygonalMesh& mesh) {
        return "<Mesh " + std::to_string(mesh.num_cells()) + " cells, " + std::to_string(mesh.num_vertices()) +
               " vertices>";
      });

  m.def("family_mesh",
        [](const std::string& family, int n, const std::string& domain, std::uint64_t seed) {
          FamilyParams p;
          p.seed = seed;
          return family_mesh(parse_family(family), parse_domain(domain), n, p);
        },
        py::arg("family"), py::arg("n"), py::arg("domain") = "square", py::arg("seed") = 1);
  m.def("composite_mesh", &generate_composite_hanging, py::arg("coarse"), py::arg("fine"));
  m.def("read_mesh", [](const std::string& path) { return read_mesh(path); });
  m.def("write_mesh", [](const std::string& path, const PolygonalMesh& mesh) { write_mesh(path, mesh); });
  m.def("dof_count", &DofMap::closed_form_scalar_count, py::arg("mesh"), py::arg("k"),
        "scalar DOFs per field: N_v + (k-1) N_e + N_E dim P_{k-2}");

  m.def("observed_rate", &observed_rate, py::arg("e0"), py::arg("e1"), py::arg("h0"), py::arg("h1"));

  m.def("convergence",
        [](const py::dict& cfg) {
          const RunConfig c = config_from(cfg);
          ConvergenceTable t;
          {
            py::gil_scoped_release release;
            t = run_convergence(c.study());
          }
          py::dict out = to_py(to_json(t));
          out["csv"] = to_csv(t);
          const RateSummary s = rate_summary(t, c.rate_tol);
          out["summary"] = s.line;
          out["rates_pass"] = s.pass;
          return out;
        },
        py::arg("config") = py::dict(),
        "Example-1 convergence study; config keys as in the CLI JSON (family, domain, n, k, mesh, ...).");

  m.def("solve",
        [](const py::dict& cfg, const std::string& vtk_path) {
          const RunConfig c = config_from(cfg);
          if (c.n_values.size() != 1) throw ValidationError("solve takes a single n");
          const ManufacturedCase mc = example1_case(c.domain);
          SolutionState st;
          ErrorNorms err;
          std::unique_ptr<Discretization> disc;
          {
            py::gil_scoped_release release;
            disc = std::make_unique<Discretization>(c.build_mesh(c.n_values.front()), c.k);
            st = coupled_fixed_point(*disc, with_loads(c.coeffs, mc), c.solver, boundary_data(mc));
            err = error_norms(*disc, st, mc);
            if (!vtk_path.empty()) write_vtk(vtk_path, disc->mesh(), vertex_fields(*disc, st));
          }
          const int ns = disc->dofs().scalar_size();
          return py::dict(py::arg("E_u") = err.E_u, py::arg("E_p") = err.E_p, py::arg("E_psi") = err.E_psi,
                          py::arg("outer_iterations") = st.outer_iterations,
                          py::arg("newton_iterations") = st.newton_iterations,
                          py::arg("pressure_mean") = pressure_mean(*disc, st.p),
                          py::arg("divergence") = divergence_norm(*disc, st.u),
                          py::arg("ux") = Eigen::VectorXd(st.u.head(ns)), py::arg("uy") = Eigen::VectorXd(st.u.tail(ns)),
                          py::arg("p") = st.p, py::arg("psi") = st.psi, py::arg("mesh") = disc->mesh());
        },
        py::arg("config") = py::dict(), py::arg("vtk") = "",
        "One Example-1 solve (config['n'] a single resolution); optionally writes a VTK file.");
}
