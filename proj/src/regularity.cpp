#include "spbvem/regularity.hpp"

#include <algorithm>
#include <limits>

namespace spbvem {

namespace {

std::vector<HalfPlane> edge_half_planes(std::span<const Point2> pts) {
  std::vector<HalfPlane> hps;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = pts[i], b = pts[(i + 1) % n];
    const Point2 d = b - a;
    const double len = norm(d);
    const Point2 outward{d.y / len, -d.x / len};
    hps.push_back({outward, dot(outward, a)});
  }
  return hps;
}

std::vector<Point2> intersect(std::span<const Point2> pts, const std::vector<HalfPlane>& hps, double shrink) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  std::vector<Point2> poly{{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}};
  for (const auto& hp : hps) {
    poly = clip_convex(poly, {hp.normal, hp.offset - shrink});
    if (poly.size() < 3) return {};
  }
  return poly;
}

}  // namespace

std::vector<Point2> polygon_kernel(std::span<const Point2> pts) {
  auto k = intersect(pts, edge_half_planes(pts), 0.0);
  if (k.size() < 3 || signed_area(k) <= 0.0) return {};
  return k;
}

double kernel_inscribed_radius(std::span<const Point2> pts) {
  const auto hps = edge_half_planes(pts);
  double scale = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) scale = std::max(scale, distance(pts[i], pts[j]));
  if (intersect(pts, hps, 0.0).size() < 3) return 0.0;
  // bisection on the inward offset of every edge line
  double lo = 0.0, hi = scale;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto k = intersect(pts, hps, mid);
    if (k.size() >= 3 && signed_area(k) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

RegularityReport check_regularity(const PolygonalMesh& mesh, double delta0) {
  RegularityReport r;
  r.delta0_star_shaped = std::numeric_limits<double>::infinity();
  r.delta0_edge = std::numeric_limits<double>::infinity();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto pts = mesh.cell_points(static_cast<int>(c));
    const double hp = mesh.polygons()[c].diameter;
    const double star = kernel_inscribed_radius(pts) / hp;
    double edge = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) edge = std::min(edge, distance(pts[i], pts[(i + 1) % pts.size()]) / hp);
    r.delta0_star_shaped = std::min(r.delta0_star_shaped, star);
    r.delta0_edge = std::min(r.delta0_edge, edge);
    if (std::min(star, edge) < worst) {
      worst = std::min(star, edge);
      r.worst_element_id = static_cast<int>(c);
    }
  }
  r.passed = r.delta0_star_shaped >= delta0 && r.delta0_edge >= delta0;
  return r;
}

}  // namespace spbvem
