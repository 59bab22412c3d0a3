#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spbvem/mesh.hpp"

namespace spbvem {

enum class Domain { UnitSquare, LShape };

Domain parse_domain(const std::string& name);
std::string to_string(Domain d);

/// Area of the domain: 1 for the unit square, 0.75 for (0,1)^2 minus (0,0.5)^2.
double domain_area(Domain d);

/// Uniform N x N quadrilaterals; for the L-shape the quads inside the
/// removed lower-left quarter are dropped (N must then be even).
PolygonalMesh generate_structured(Domain domain, int n);

/// Hexagonal tiling of the unit square (Voronoi cells of a staggered point
/// lattice with N columns) whose interior vertices are shifted by
/// distortion/N in a random direction. The distortion is reduced and the
/// mesh regenerated if the shifted mesh violates star-shapedness or edge
/// length ratios of 0.1.
PolygonalMesh generate_distorted_hex(int n, double distortion, std::uint64_t seed);

/// Every cell of an N x N grid is split in two by a zig-zag polyline, so
/// each element has exactly one re-entrant corner.
PolygonalMesh generate_nonconvex(int n);

/// Lloyd-relaxed Voronoi mesh from a jittered grid of about N^2 * |domain|
/// seeds. Cells are always convex: a cell cut by the re-entrant corner of
/// the L-shape is split along one of the corner's axis lines.
PolygonalMesh generate_voronoi(Domain domain, int n, int lloyd_iters, std::uint64_t seed);

/// Voronoi mesh from explicit seeds.
PolygonalMesh voronoi_from_seeds(Domain domain, std::vector<Point2> seeds, int lloyd_iters);

/// Left half [0,0.5]x[0,1] in quads with `n_coarse` rows, right half in
/// zig-zag split cells with `n_fine` rows. Fine interface vertices become
/// hanging nodes of the coarse interface cells.
PolygonalMesh generate_composite_hanging(int n_coarse, int n_fine);

/// Moves every interior vertex by `amplitude` times its shortest incident
/// edge, in a random direction; boundary vertices and vertices where
/// `pinned` holds stay put. Breaks the translation symmetry of the
/// structured families. Throws GeometryError if an element degenerates.
PolygonalMesh jitter_vertices(const PolygonalMesh& mesh, double amplitude, std::uint64_t seed,
                              const std::function<bool(Point2)>& pinned = {});

}  // namespace spbvem
