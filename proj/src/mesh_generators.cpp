#include "spbvem/mesh_generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "spbvem/error.hpp"
#include "spbvem/regularity.hpp"
#include "spbvem/rng.hpp"

namespace spbvem {

Domain parse_domain(const std::string& name) {
  if (name == "square" || name == "unit-square" || name == "unit_square") return Domain::UnitSquare;
  if (name == "lshape" || name == "L-shape" || name == "l-shape" || name == "L") return Domain::LShape;
  throw ValidationError("unknown domain '" + name + "' (expected square or lshape)");
}

std::string to_string(Domain d) { return d == Domain::UnitSquare ? "square" : "lshape"; }

double domain_area(Domain d) { return d == Domain::UnitSquare ? 1.0 : 0.75; }

namespace {

using Poly = std::vector<Point2>;

Poly rect(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

Poly clip_rect(Poly p, double x0, double y0, double x1, double y1) {
  p = clip_convex(p, {{-1, 0}, -x0});
  p = clip_convex(p, {{1, 0}, x1});
  p = clip_convex(p, {{0, -1}, -y0});
  p = clip_convex(p, {{0, 1}, y1});
  return p;
}

double area_or_zero(const Poly& p) { return p.size() < 3 ? 0.0 : signed_area(p); }

Point2 centroid_of(const std::vector<Poly>& pieces) {
  double a = 0.0;
  Point2 c{};
  for (const auto& p : pieces) {
    const auto g = polygon_geometry(p);
    a += g.area;
    c = c + g.area * g.centroid;
  }
  return (1.0 / a) * c;
}

void check_positive(int n, const char* what) {
  if (n < 1) throw ValidationError(std::string(what) + " must be >= 1");
}

/// Zig-zag split of the cell [x0,x0+w]x[y0,y0+h] into two congruent halves.
std::array<Poly, 2> chevron_halves(double x0, double y0, double w, double h) {
  const double xm = x0 + 0.5 * w, o = 0.25 * w;
  const Point2 b{xm, y0}, p1{xm + o, y0 + h / 3.0}, p2{xm - o, y0 + 2.0 * h / 3.0}, t{xm, y0 + h};
  Poly left{{x0, y0}, b, p1, p2, t, {x0, y0 + h}};
  Poly right{b, {x0 + w, y0}, {x0 + w, y0 + h}, t, p2, p1};
  return {left, right};
}

/// Seeds binned on a uniform grid over the unit square.
struct SeedGrid {
  int g = 1;
  std::vector<std::vector<std::size_t>> bins;

  explicit SeedGrid(const std::vector<Point2>& seeds)
      : g(std::max(1, static_cast<int>(std::sqrt(static_cast<double>(seeds.size()))))), bins(g * g) {
    for (std::size_t i = 0; i < seeds.size(); ++i) bins[bin(seeds[i].x) + g * bin(seeds[i].y)].push_back(i);
  }
  int bin(double t) const { return std::clamp(static_cast<int>(t * g), 0, g - 1); }
};

/// Cell of seed i clipped by neighbours ring by ring; after ring r every seed
/// closer than r / g has been used, which bounds the search.
Poly voronoi_cell(const std::vector<Point2>& seeds, std::size_t i, const SeedGrid& grid) {
  const Point2 s = seeds[i];
  const int bx = grid.bin(s.x), by = grid.bin(s.y), g = grid.g;
  Poly cell = rect(0, 0, 1, 1);
  std::vector<std::size_t> ring;
  for (int r = 0; r <= g; ++r) {
    ring.clear();
    for (int j = by - r; j <= by + r; ++j)
      for (int k = bx - r; k <= bx + r; ++k) {
        if (j < 0 || k < 0 || j >= g || k >= g) continue;
        if (std::max(std::abs(j - by), std::abs(k - bx)) != r) continue;
        for (std::size_t o : grid.bins[k + g * j])
          if (o != i) ring.push_back(o);
      }
    std::sort(ring.begin(), ring.end(), [&](std::size_t a, std::size_t b) {
      const double da = distance(seeds[a], s), db = distance(seeds[b], s);
      return da < db || (da == db && a < b);
    });
    for (std::size_t j : ring) {
      const Point2 o = seeds[j];
      const Point2 n = o - s;
      cell = clip_convex(cell, {n, dot(n, 0.5 * (s + o))});
      if (cell.size() < 3) return cell;
    }
    double reach = 0.0;
    for (const auto& p : cell) reach = std::max(reach, distance(p, s));
    if (2.0 * reach * (1.0 + 1e-12) < static_cast<double>(r) / g) break;
  }
  return cell;
}

/// Restriction of a convex cell to the domain, as one or two convex pieces.
std::vector<Poly> restrict_to_domain(const Poly& cell, Domain domain) {
  if (cell.size() < 3 || area_or_zero(cell) <= 1e-14) return {};
  if (domain == Domain::UnitSquare) return {cell};

  const Poly cut = clip_rect(cell, 0, 0, 0.5, 0.5);
  if (area_or_zero(cut) <= 1e-14 * area_or_zero(cell)) return {cell};

  // option 0 splits along y = 0.5, option 1 along x = 0.5
  const std::array<std::array<Poly, 2>, 2> options{{
      {clip_rect(cell, 0, 0.5, 1, 1), clip_rect(cell, 0.5, 0, 1, 0.5)},
      {clip_rect(cell, 0, 0.5, 0.5, 1), clip_rect(cell, 0.5, 0, 1, 1)},
  }};
  std::vector<Poly> pieces;
  for (const auto& p : options[0])
    if (area_or_zero(p) > 1e-14) pieces.push_back(p);
  if (pieces.size() <= 1) return pieces;

  // corner strictly inside the cell -> restriction is non-convex, keep two pieces
  const Point2 corner{0.5, 0.5};
  double scale = 0.0;
  for (const auto& p : cell) scale = std::max(scale, distance(p, corner));
  bool corner_inside = true;
  for (std::size_t i = 0; i < cell.size(); ++i) {
    const Point2 a = cell[i], b = cell[(i + 1) % cell.size()];
    if (cross(b - a, corner - a) <= 1e-9 * scale * distance(a, b)) corner_inside = false;
  }
  if (!corner_inside) {
    Poly all;
    for (const auto& p : pieces) all.insert(all.end(), p.begin(), p.end());
    return {convex_hull(all)};
  }
  auto min_piece = [](const std::array<Poly, 2>& o) { return std::min(area_or_zero(o[0]), area_or_zero(o[1])); };
  const auto& best = min_piece(options[0]) >= min_piece(options[1]) ? options[0] : options[1];
  return {best[0], best[1]};
}

std::vector<std::vector<Poly>> voronoi_pieces(const std::vector<Point2>& seeds, Domain domain) {
  std::vector<std::vector<Poly>> out(seeds.size());
  const SeedGrid grid(seeds);
  for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = restrict_to_domain(voronoi_cell(seeds, i, grid), domain);
  return out;
}

}  // namespace

PolygonalMesh generate_structured(Domain domain, int n) {
  check_positive(n, "N");
  if (domain == Domain::LShape && n % 2 != 0) throw ValidationError("L-shape structured mesh needs even N");
  const double h = 1.0 / n;
  std::vector<Poly> polys;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (domain == Domain::LShape && i < n / 2 && j < n / 2) continue;
      polys.push_back(rect(i * h, j * h, (i + 1) * h, (j + 1) * h));
    }
  return mesh_from_polygons(polys);
}

PolygonalMesh generate_nonconvex(int n) {
  if (n < 1) throw ValidationError("N must be >= 1");
  const double h = 1.0 / n;
  std::vector<Poly> polys;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (auto& half : chevron_halves(i * h, j * h, h, h)) polys.push_back(std::move(half));
  return mesh_from_polygons(polys);
}

PolygonalMesh generate_composite_hanging(int n_coarse, int n_fine) {
  check_positive(n_coarse, "N_coarse");
  check_positive(n_fine, "N_fine");
  if (n_fine % n_coarse != 0) throw ValidationError("N_fine must be an integer multiple of N_coarse");
  std::vector<Poly> polys;
  const int cols_c = (n_coarse + 1) / 2;
  const double wc = 0.5 / cols_c, hc = 1.0 / n_coarse;
  for (int j = 0; j < n_coarse; ++j)
    for (int i = 0; i < cols_c; ++i) polys.push_back(rect(i * wc, j * hc, (i + 1) * wc, (j + 1) * hc));
  const int cols_f = (n_fine + 1) / 2;
  const double wf = 0.5 / cols_f, hf = 1.0 / n_fine;
  for (int j = 0; j < n_fine; ++j)
    for (int i = 0; i < cols_f; ++i)
      for (auto& half : chevron_halves(0.5 + i * wf, j * hf, wf, hf)) polys.push_back(std::move(half));
  return mesh_from_polygons(polys);
}

namespace {

/// Lloyd-relaxed clipped Voronoi tessellation. The first `n_fixed` seeds do
/// not move, and moving seeds are kept at least `keep_out` away from the
/// re-entrant corner of the L-shape.
PolygonalMesh relaxed_voronoi(Domain domain, std::vector<Point2> seeds, int lloyd_iters, std::size_t n_fixed,
                              double keep_out) {
  if (seeds.empty()) throw ValidationError("Voronoi mesh needs at least one seed");
  if (lloyd_iters < 0) throw ValidationError("lloyd_iters must be >= 0");
  const Point2 corner{0.5, 0.5};
  auto pieces = voronoi_pieces(seeds, domain);
  for (int it = 0; it < lloyd_iters; ++it) {
    std::vector<Point2> moved;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (pieces[i].empty()) continue;
      if (i < n_fixed) {
        moved.push_back(seeds[i]);
        continue;
      }
      Point2 c = centroid_of(pieces[i]);
      const double d = distance(c, corner);
      if (d < keep_out && d > 0.0) c = corner + (keep_out / d) * (c - corner);
      moved.push_back(c);
    }
    seeds = std::move(moved);
    pieces = voronoi_pieces(seeds, domain);
  }
  std::vector<Poly> polys;
  for (auto& cell : pieces)
    for (auto& p : cell) polys.push_back(std::move(p));
  return mesh_from_polygons(polys);
}

}  // namespace

PolygonalMesh voronoi_from_seeds(Domain domain, std::vector<Point2> seeds, int lloyd_iters) {
  return relaxed_voronoi(domain, std::move(seeds), lloyd_iters, 0, 0.0);
}

PolygonalMesh generate_voronoi(Domain domain, int n, int lloyd_iters, std::uint64_t seed) {
  if (n < 2) throw ValidationError("Voronoi mesh needs N >= 2");
  if (domain == Domain::LShape && n % 2 != 0) throw ValidationError("L-shape Voronoi mesh needs even N");
  SplitMix64 rng(seed);
  std::vector<Point2> seeds;
  const double h = 1.0 / n;
  if (domain == Domain::LShape) {
    // Three fixed seeds equidistant from the re-entrant corner make it a
    // Voronoi vertex, so no cell has to be cut there.
    const double a = 0.5 * h;
    seeds = {{0.5 - a, 0.5 + a}, {0.5 + a, 0.5 + a}, {0.5 + a, 0.5 - a}};
  }
  const std::size_t n_fixed = seeds.size();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point2 c{(i + 0.5) * h, (j + 0.5) * h};
      const Point2 p{c.x + rng.uniform(-0.3, 0.3) * h, c.y + rng.uniform(-0.3, 0.3) * h};
      if (domain == Domain::LShape) {
        const bool hole = c.x < 0.5 && c.y < 0.5;
        const bool anchored = std::abs(c.x - 0.5) < h && std::abs(c.y - 0.5) < h;
        if (hole || anchored) continue;
      }
      seeds.push_back(p);
    }
  return relaxed_voronoi(domain, std::move(seeds), lloyd_iters, n_fixed, 1.05 * std::sqrt(2.0) * 0.5 * h);
}

namespace {

/// Staggered lattice with N columns whose Voronoi cells are hexagons; the
/// row spacing is rounded so that rows land on y = 0 and y = 1.
std::vector<Point2> hex_lattice(int n) {
  const int rows = std::max(1, static_cast<int>(std::lround(2.0 * n / std::sqrt(3.0))));
  const double a = 1.0 / n, dy = 1.0 / rows;
  std::vector<Point2> seeds;
  for (int j = 0; j <= rows; ++j) {
    const bool odd = j % 2 == 1;
    for (int i = odd ? -1 : 0; i <= n; ++i) {
      const double x = odd ? (i + 0.5) * a : i * a;
      if (x < -0.5 * a || x > 1.0 + 0.5 * a) continue;
      seeds.push_back({x, j * dy});
    }
  }
  return seeds;
}

}  // namespace

PolygonalMesh generate_distorted_hex(int n, double distortion, std::uint64_t seed) {
  check_positive(n, "N");
  if (distortion < 0.0 || distortion > 0.3) throw ValidationError("distortion must lie in [0, 0.3]");
  const PolygonalMesh base = voronoi_from_seeds(Domain::UnitSquare, hex_lattice(n), 0);
  if (distortion == 0.0) return base;

  const double h = 1.0 / n;
  double d = distortion;
  for (int attempt = 0; attempt < 12; ++attempt, d *= 0.75) {
    SplitMix64 rng(seed);
    std::vector<Point2> verts(base.vertices().begin(), base.vertices().end());
    bool inside = true;
    for (std::size_t v = 0; v < verts.size(); ++v) {
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      if (base.is_boundary_vertex(static_cast<int>(v))) continue;
      verts[v] = verts[v] + d * h * Point2{std::cos(theta), std::sin(theta)};
      if (verts[v].x <= 0.0 || verts[v].x >= 1.0 || verts[v].y <= 0.0 || verts[v].y >= 1.0) inside = false;
    }
    if (!inside) continue;
    std::vector<std::vector<int>> cells;
    for (const auto& p : base.polygons()) cells.push_back(p.vertex_ids);
    try {
      PolygonalMesh mesh(std::move(verts), std::move(cells));
      if (check_regularity(mesh, 0.1).passed) return mesh;
    } catch (const GeometryError&) {
      // inverted element, retry with less distortion
    }
  }
  std::ostringstream os;
  os << "could not build a regular distorted hexagonal mesh for N=" << n << ", distortion=" << distortion;
  throw GeometryError(os.str());
}

PolygonalMesh jitter_vertices(const PolygonalMesh& mesh, double amplitude, std::uint64_t seed,
                              const std::function<bool(Point2)>& pinned) {
  if (amplitude < 0.0 || amplitude >= 0.5) throw ValidationError("jitter amplitude must lie in [0, 0.5)");
  std::vector<Point2> verts(mesh.vertices().begin(), mesh.vertices().end());
  std::vector<double> reach(verts.size(), std::numeric_limits<double>::infinity());
  std::vector<std::vector<int>> cells;
  for (const auto& p : mesh.polygons()) {
    const auto& ids = p.vertex_ids;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int a = ids[i], b = ids[(i + 1) % ids.size()];
      const double len = distance(verts[a], verts[b]);
      reach[a] = std::min(reach[a], len);
      reach[b] = std::min(reach[b], len);
    }
    cells.push_back(ids);
  }
  SplitMix64 rng(seed);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    // draw for every vertex so the stream does not depend on the pin rule
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    if (mesh.is_boundary_vertex(static_cast<int>(v)) || (pinned && pinned(verts[v]))) continue;
    verts[v] = verts[v] + amplitude * reach[v] * Point2{std::cos(theta), std::sin(theta)};
  }
  return PolygonalMesh(std::move(verts), std::move(cells));
}

}  // namespace spbvem
