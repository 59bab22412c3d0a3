#include "spbvem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "spbvem/error.hpp"

namespace spbvem {

namespace {

std::string cell_msg(std::size_t c, const std::string& what) {
  std::ostringstream os;
  os << "element " << c << ": " << what;
  return os.str();
}

}  // namespace

PolygonalMesh::PolygonalMesh(std::vector<Point2> vertices, std::vector<std::vector<int>> cells,
                             std::vector<int> boundary_tags)
    : vertices_(std::move(vertices)) {
  const auto nv = static_cast<std::int64_t>(vertices_.size());
  for (const auto& p : vertices_)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw GeometryError("non-finite vertex coordinate");

  std::vector<int> use_count(vertices_.size(), 0);
  std::unordered_map<std::int64_t, int> edge_lookup;
  polygons_.reserve(cells.size());
  cell_edges_.resize(cells.size());

  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& ids = cells[c];
    if (ids.size() < 3) throw GeometryError(cell_msg(c, "fewer than 3 vertices"));
    for (int v : ids)
      if (v < 0 || v >= nv) throw GeometryError(cell_msg(c, "vertex index out of range"));

    Polygon poly;
    poly.vertex_ids = ids;
    std::vector<Point2> pts;
    pts.reserve(ids.size());
    for (int v : ids) pts.push_back(vertices_[v]);
    try {
      const auto g = polygon_geometry(pts);
      poly.area = g.area;
      poly.centroid = g.centroid;
      poly.diameter = g.diameter;
    } catch (const GeometryError& e) {
      throw GeometryError(cell_msg(c, e.what()));
    }
    h_ = std::max(h_, poly.diameter);
    total_area_ += poly.area;

    const std::size_t n = ids.size();
    cell_edges_[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int a = ids[i], b = ids[(i + 1) % n];
      if (a == b) throw GeometryError(cell_msg(c, "repeated consecutive vertex"));
      ++use_count[a];
      const int lo = std::min(a, b), hi = std::max(a, b);
      const std::int64_t key = static_cast<std::int64_t>(lo) * nv + hi;
      auto [it, inserted] = edge_lookup.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        Edge e;
        e.v = {lo, hi};
        e.cells = {static_cast<int>(c), -1};
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.cells[1] >= 0) throw GeometryError(cell_msg(c, "edge shared by more than two elements"));
        // the neighbour must traverse the shared edge in the opposite direction
        const auto& other = cells[e.cells[0]];
        const std::size_t m = other.size();
        for (std::size_t j = 0; j < m; ++j)
          if (other[j] == a && other[(j + 1) % m] == b)
            throw GeometryError(cell_msg(c, "overlapping element (edge orientation repeated)"));
        e.cells[1] = static_cast<int>(c);
      }
      cell_edges_[c][i] = it->second;
    }
    polygons_.push_back(std::move(poly));
  }

  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (use_count[v] == 0) {
      std::ostringstream os;
      os << "dangling vertex " << v;
      throw GeometryError(os.str());
    }

  boundary_vertex_.assign(vertices_.size(), 0);
  std::size_t nb = 0;
  for (auto& e : edges_) {
    if (!e.on_boundary()) continue;
    e.boundary_tag = boundary_tags.empty() ? kDirichletTag : -1;
    boundary_vertex_[e.v[0]] = boundary_vertex_[e.v[1]] = 1;
    ++nb;
  }
  if (!boundary_tags.empty()) {
    if (boundary_tags.size() != nb) throw GeometryError("boundary tag count does not match boundary edge count");
    std::size_t i = 0;
    for (auto& e : edges_)
      if (e.on_boundary()) e.boundary_tag = boundary_tags[i++];
  }
}

std::vector<Point2> PolygonalMesh::cell_points(int cell) const {
  std::vector<Point2> pts;
  const auto& ids = polygons_[cell].vertex_ids;
  pts.reserve(ids.size());
  for (int v : ids) pts.push_back(vertices_[v]);
  return pts;
}

std::vector<int> PolygonalMesh::boundary_edges() const {
  std::vector<int> out;
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (edges_[e].on_boundary()) out.push_back(static_cast<int>(e));
  return out;
}

bool operator==(const PolygonalMesh& a, const PolygonalMesh& b) {
  if (a.vertices_ != b.vertices_ || a.polygons_.size() != b.polygons_.size()) return false;
  for (std::size_t c = 0; c < a.polygons_.size(); ++c)
    if (a.polygons_[c].vertex_ids != b.polygons_[c].vertex_ids) return false;
  for (std::size_t e = 0; e < a.edges_.size(); ++e)
    if (a.edges_[e].boundary_tag != b.edges_[e].boundary_tag) return false;
  return true;
}

namespace {

/// Uniform bucket grid over points, used for merging and on-edge queries.
class PointGrid {
 public:
  PointGrid(double xmin, double ymin, double cell) : x0_(xmin), y0_(ymin), cell_(cell) {}

  std::int64_t key(std::int64_t i, std::int64_t j) const { return (i << 32) ^ (j & 0xffffffff); }
  std::int64_t ix(double x) const { return static_cast<std::int64_t>(std::floor((x - x0_) / cell_)); }
  std::int64_t iy(double y) const { return static_cast<std::int64_t>(std::floor((y - y0_) / cell_)); }

  void insert(Point2 p, int id) { buckets_[key(ix(p.x), iy(p.y))].push_back(id); }

  template <class F>
  void visit_box(Point2 lo, Point2 hi, F&& f) const {
    for (auto i = ix(lo.x); i <= ix(hi.x); ++i)
      for (auto j = iy(lo.y); j <= iy(hi.y); ++j) {
        auto it = buckets_.find(key(i, j));
        if (it == buckets_.end()) continue;
        for (int id : it->second) f(id);
      }
  }

 private:
  double x0_, y0_, cell_;
  std::unordered_map<std::int64_t, std::vector<int>> buckets_;
};

}  // namespace

PolygonalMesh mesh_from_polygons(const std::vector<std::vector<Point2>>& polys, double merge_tol) {
  double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
  std::size_t total = 0;
  double edge_sum = 0.0;
  for (const auto& poly : polys)
    for (std::size_t i = 0; i < poly.size(); ++i) {
      xmin = std::min(xmin, poly[i].x);
      ymin = std::min(ymin, poly[i].y);
      xmax = std::max(xmax, poly[i].x);
      ymax = std::max(ymax, poly[i].y);
      edge_sum += distance(poly[i], poly[(i + 1) % poly.size()]);
      ++total;
    }
  if (total == 0) throw GeometryError("empty polygon set");
  const double extent = std::max(xmax - xmin, ymax - ymin);
  const double tol = merge_tol * extent;

  // merge coincident points, first occurrence wins
  std::vector<Point2> verts;
  PointGrid merge_grid(xmin, ymin, std::max(4.0 * tol, 1e-300));
  std::vector<std::vector<int>> cells;
  cells.reserve(polys.size());
  for (const auto& poly : polys) {
    std::vector<int> ids;
    for (const auto& p : poly) {
      int found = -1;
      merge_grid.visit_box({p.x - tol, p.y - tol}, {p.x + tol, p.y + tol}, [&](int id) {
        if (found < 0 && distance(verts[id], p) <= tol) found = id;
      });
      if (found < 0) {
        found = static_cast<int>(verts.size());
        verts.push_back(p);
        merge_grid.insert(p, found);
      }
      if (ids.empty() || ids.back() != found) ids.push_back(found);
    }
    while (ids.size() > 1 && ids.front() == ids.back()) ids.pop_back();
    if (ids.size() >= 3) cells.push_back(std::move(ids));
  }

  // insert vertices lying strictly inside an edge (T-junctions become hanging nodes)
  const double avg_edge = edge_sum / static_cast<double>(total);
  PointGrid edge_grid(xmin, ymin, std::max(avg_edge, 1e-300));
  for (std::size_t v = 0; v < verts.size(); ++v) edge_grid.insert(verts[v], static_cast<int>(v));
  for (auto& ids : cells) {
    std::vector<int> out;
    const std::size_t n = ids.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = ids[i], b = ids[(i + 1) % n];
      out.push_back(a);
      const Point2 pa = verts[a], pb = verts[b];
      const Point2 d = pb - pa;
      const double len2 = dot(d, d);
      std::vector<std::pair<double, int>> on_edge;
      edge_grid.visit_box({std::min(pa.x, pb.x) - tol, std::min(pa.y, pb.y) - tol},
                          {std::max(pa.x, pb.x) + tol, std::max(pa.y, pb.y) + tol}, [&](int id) {
                            if (id == a || id == b) return;
                            const Point2 q = verts[id] - pa;
                            const double t = dot(q, d) / len2;
                            if (t <= 0.0 || t >= 1.0) return;
                            if (std::abs(cross(d, q)) / std::sqrt(len2) > tol) return;
                            on_edge.emplace_back(t, id);
                          });
      std::sort(on_edge.begin(), on_edge.end());
      for (const auto& [t, id] : on_edge) out.push_back(id);
    }
    ids = std::move(out);
  }

  // drop unused vertices, keep relative order
  std::vector<int> remap(verts.size(), -1);
  for (const auto& ids : cells)
    for (int v : ids) remap[v] = 0;
  std::vector<Point2> kept;
  for (std::size_t v = 0; v < verts.size(); ++v)
    if (remap[v] == 0) {
      remap[v] = static_cast<int>(kept.size());
      kept.push_back(verts[v]);
    }
  for (auto& ids : cells)
    for (int& v : ids) v = remap[v];
  return PolygonalMesh(std::move(kept), std::move(cells));
}

}  // namespace spbvem
