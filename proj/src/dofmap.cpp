#include "spbvem/dofmap.hpp"

#include "spbvem/error.hpp"

namespace spbvem {

DofMap::DofMap(const PolygonalMesh& mesh, int k) : k_(k) {
  if (k < 1) throw ValidationError("VEM order k must be >= 1");
  n_vertex_ = static_cast<int>(mesh.num_vertices());
  const int ne = static_cast<int>(mesh.num_edges());
  const int nm = poly_dim(k - 2);
  first_moment_ = n_vertex_ + (k - 1) * ne;
  scalar_size_ = first_moment_ + nm * static_cast<int>(mesh.num_cells());

  nodes_.resize(first_moment_);
  boundary_.assign(scalar_size_, 0);
  for (int v = 0; v < n_vertex_; ++v) nodes_[v] = mesh.vertices()[v];
  const auto gl = gauss_lobatto_edge_nodes(k);
  for (int e = 0; e < ne; ++e) {
    const auto& edge = mesh.edges()[e];
    const Point2 a = mesh.vertices()[edge.v[0]], b = mesh.vertices()[edge.v[1]];
    for (int j = 0; j < k - 1; ++j) {
      const int id = n_vertex_ + e * (k - 1) + j;
      nodes_[id] = a + gl[j] * (b - a);
      if (edge.boundary_tag > 0) boundary_[id] = 1;
    }
    if (edge.boundary_tag > 0) boundary_[edge.v[0]] = boundary_[edge.v[1]] = 1;
  }

  cell_dofs_.resize(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& ids = mesh.polygons()[c].vertex_ids;
    const int nv = static_cast<int>(ids.size());
    auto& d = cell_dofs_[c];
    d.reserve(nv * k + nm);
    for (int v : ids) d.push_back(v);
    for (int i = 0; i < nv; ++i) {
      const int e = mesh.cell_edge(static_cast<int>(c), i);
      const bool forward = ids[i] == mesh.edges()[e].v[0];
      for (int j = 0; j < k - 1; ++j) d.push_back(n_vertex_ + e * (k - 1) + (forward ? j : k - 2 - j));
    }
    for (int m = 0; m < nm; ++m) d.push_back(first_moment_ + static_cast<int>(c) * nm + m);
  }
}

int DofMap::closed_form_scalar_count(const PolygonalMesh& mesh, int k) {
  return static_cast<int>(mesh.num_vertices()) + (k - 1) * static_cast<int>(mesh.num_edges()) +
         static_cast<int>(mesh.num_cells()) * poly_dim(k - 2);
}

DofMap build_dof_map(const PolygonalMesh& mesh, int k) { return DofMap(mesh, k); }

Eigen::VectorXd interpolate_scalar(const PolygonalMesh& mesh, const DofMap& dofs,
                                   const std::function<double(Point2)>& field) {
  Eigen::VectorXd out(dofs.scalar_size());
  for (int i = 0; i < dofs.scalar_size(); ++i)
    if (dofs.is_nodal(i)) out[i] = field(dofs.node_position(i));
  const int nm = dofs.n_moments();
  if (nm == 0) return out;
  std::vector<double> mv(nm);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& poly = mesh.polygons()[c];
    const auto pts = mesh.cell_points(static_cast<int>(c));
    const MonomialBasis basis(dofs.k() - 2, poly.centroid, poly.diameter);
    const auto q = polygon_quadrature(pts, 2 * dofs.k() + 4, static_cast<int>(c));
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(nm);
    for (std::size_t p = 0; p < q.points.size(); ++p) {
      basis.values(q.points[p], mv);
      const double f = field(q.points[p]) * q.weights[p];
      for (int m = 0; m < nm; ++m) acc[m] += f * mv[m];
    }
    const auto& cd = dofs.cell_dofs(static_cast<int>(c));
    const int base = static_cast<int>(cd.size()) - nm;
    for (int m = 0; m < nm; ++m) out[cd[base + m]] = acc[m] / poly.area;
  }
  return out;
}

}  // namespace spbvem
