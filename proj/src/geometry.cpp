#include "spbvem/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "spbvem/error.hpp"

namespace spbvem {

double signed_area(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

PolygonGeometry polygon_geometry(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  if (n < 3) throw GeometryError("polygon needs at least 3 vertices");

  // Shift to the first vertex so the first-moment sums stay well conditioned.
  const Point2 o = pts[0];
  double twice = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = pts[i] - o;
    const Point2 b = pts[(i + 1) % n] - o;
    const double c = a.x * b.y - b.x * a.y;
    twice += c;
    cx += (a.x + b.x) * c;
    cy += (a.y + b.y) * c;
  }
  const double area = 0.5 * twice;
  if (area <= 1e-14) {
    std::ostringstream os;
    os << "degenerate or clockwise polygon (signed area " << area << ")";
    throw GeometryError(os.str());
  }

  PolygonGeometry g;
  g.area = area;
  g.centroid = {o.x + cx / (6.0 * area), o.y + cy / (6.0 * area)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.diameter = std::max(g.diameter, distance(pts[i], pts[j]));
  return g;
}

std::vector<double> interior_angles(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 prev = pts[(i + n - 1) % n];
    const Point2 cur = pts[i];
    const Point2 next = pts[(i + 1) % n];
    const Point2 a = prev - cur;
    const Point2 b = next - cur;
    // angle swept counter-clockwise from b to a, which is the interior side for CCW order
    double ang = std::atan2(cross(b, a), dot(b, a));
    if (ang < 0) ang += 2.0 * std::numbers::pi;
    out[i] = ang;
  }
  return out;
}

bool is_convex(std::span<const Point2> pts, double tol) {
  const std::size_t n = pts.size();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, distance(pts[i], pts[(i + 1) % n]));
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = pts[(i + 1) % n] - pts[i];
    const Point2 b = pts[(i + 2) % n] - pts[(i + 1) % n];
    if (cross(a, b) < -tol * scale * scale) return false;
  }
  return true;
}

bool contains_point(std::span<const Point2> pts, Point2 p) {
  bool inside = false;
  const std::size_t n = pts.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = pts[i];
    const Point2& b = pts[j];
    if (((a.y > p.y) != (b.y > p.y)) && (p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)) inside = !inside;
  }
  return inside;
}

std::vector<Point2> convex_hull(std::vector<Point2> pts, double rel_tol) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, distance(p, pts.front()));
  const double tol = rel_tol * scale * scale;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= tol) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= tol) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Point2> clip_convex(std::span<const Point2> poly, const HalfPlane& hp) {
  std::vector<Point2> out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[(i + 1) % n];
    const double da = dot(hp.normal, a) - hp.offset;
    const double db = dot(hp.normal, b) - hp.offset;
    if (da <= 0) out.push_back(a);
    if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

std::vector<std::array<int, 3>> ear_clip(std::span<const Point2> pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::vector<std::array<int, 3>> tris;
  tris.reserve(n - 2);

  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, distance(pts[i], pts[(i + 1) % n]));
  const double tol = 1e-14 * scale * scale;

  auto inside_tri = [&](Point2 p, Point2 a, Point2 b, Point2 c) {
    return cross(b - a, p - a) >= -tol && cross(c - b, p - b) >= -tol && cross(a - c, p - c) >= -tol;
  };

  int guard = 0;
  while (idx.size() > 3) {
    const int m = static_cast<int>(idx.size());
    bool clipped = false;
    for (int i = 0; i < m; ++i) {
      const int ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
      const Point2 a = pts[ia], b = pts[ib], c = pts[ic];
      if (cross(b - a, c - b) <= tol) continue;  // reflex or flat
      bool ear = true;
      for (int j = 0; j < m && ear; ++j) {
        const int q = idx[j];
        if (q == ia || q == ib || q == ic) continue;
        if (pts[q] == a || pts[q] == b || pts[q] == c) continue;
        if (inside_tri(pts[q], a, b, c)) ear = false;
      }
      if (!ear) continue;
      tris.push_back({ia, ib, ic});
      idx.erase(idx.begin() + i);
      clipped = true;
      break;
    }
    if (!clipped || ++guard > 4 * n) throw GeometryError("ear clipping failed: polygon is not simple");
  }
  if (cross(pts[idx[1]] - pts[idx[0]], pts[idx[2]] - pts[idx[1]]) > tol) tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

}  // namespace spbvem
