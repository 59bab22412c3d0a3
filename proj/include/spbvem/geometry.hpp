#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace spbvem {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct PolygonGeometry {
  double area = 0.0;
  Point2 centroid;
  double diameter = 0.0;
};

/// Shoelace signed area; positive for counter-clockwise vertex order.
double signed_area(std::span<const Point2> pts);

/// Area, centroid and diameter of a simple counter-clockwise polygon.
/// Throws GeometryError when the area is not above 1e-14.
PolygonGeometry polygon_geometry(std::span<const Point2> pts);

/// Interior angles in radians, one per vertex, for a CCW polygon.
std::vector<double> interior_angles(std::span<const Point2> pts);

bool is_convex(std::span<const Point2> pts, double tol = 1e-12);

/// Strict point-in-polygon test (even-odd rule).
bool contains_point(std::span<const Point2> pts, Point2 p);

/// Convex hull, counter-clockwise, with (near) collinear points dropped.
std::vector<Point2> convex_hull(std::vector<Point2> pts, double rel_tol = 1e-10);

/// Half-plane {x : dot(normal, x) <= offset}.
struct HalfPlane {
  Point2 normal;
  double offset = 0.0;
};

/// Sutherland-Hodgman clip of a convex polygon against one half-plane.
std::vector<Point2> clip_convex(std::span<const Point2> poly, const HalfPlane& hp);

/// Triangulation of a simple CCW polygon by ear clipping; returns index triples.
std::vector<std::array<int, 3>> ear_clip(std::span<const Point2> pts);

}  // namespace spbvem
