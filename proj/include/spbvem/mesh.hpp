#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "spbvem/geometry.hpp"

namespace spbvem {

/// One element of the mesh: CCW vertex ids plus cached geometry.
struct Polygon {
  std::vector<int> vertex_ids;
  double area = 0.0;
  Point2 centroid;
  double diameter = 0.0;
};

/// Unique vertex pair with the (at most two) adjacent cells. Vertices are
/// stored with v[0] < v[1]; cells[1] == -1 marks a boundary edge.
struct Edge {
  std::array<int, 2> v{-1, -1};
  std::array<int, 2> cells{-1, -1};
  int boundary_tag = 0;

  bool on_boundary() const { return cells[1] < 0; }
};

inline constexpr int kDirichletTag = 1;

/// Polygonal decomposition of a planar domain.
///
/// Hanging nodes are ordinary collinear vertices on the boundary of the
/// coarse neighbour, so every interior edge is shared by exactly two cells.
/// Immutable after construction.
class PolygonalMesh {
 public:
  PolygonalMesh() = default;

  /// Validates orientation, edge manifoldness and vertex usage. Boundary
  /// edges receive kDirichletTag unless `boundary_tags` (one per boundary
  /// edge, in edge order) is supplied.
  PolygonalMesh(std::vector<Point2> vertices, std::vector<std::vector<int>> cells,
                std::vector<int> boundary_tags = {});

  std::span<const Point2> vertices() const { return vertices_; }
  std::span<const Polygon> polygons() const { return polygons_; }
  std::span<const Edge> edges() const { return edges_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return polygons_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  /// Global edge id of local edge i (vertex i -> vertex i+1) of `cell`.
  int cell_edge(int cell, int i) const { return cell_edges_[cell][i]; }
  std::span<const int> cell_edges(int cell) const { return cell_edges_[cell]; }

  std::vector<Point2> cell_points(int cell) const;

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }

  /// Maximum element diameter.
  double h() const { return h_; }
  double total_area() const { return total_area_; }

  /// Edge ids with a boundary tag, in edge order.
  std::vector<int> boundary_edges() const;

  friend bool operator==(const PolygonalMesh& a, const PolygonalMesh& b);

 private:
  std::vector<Point2> vertices_;
  std::vector<Polygon> polygons_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> cell_edges_;
  std::vector<std::uint8_t> boundary_vertex_;
  double h_ = 0.0;
  double total_area_ = 0.0;
};

/// Builds a conforming mesh from a soup of CCW polygons: coincident points
/// (within `merge_tol`) are merged and any vertex lying inside another
/// polygon's edge is inserted there as a hanging node.
PolygonalMesh mesh_from_polygons(const std::vector<std::vector<Point2>>& polys, double merge_tol = 1e-10);

}  // namespace spbvem
