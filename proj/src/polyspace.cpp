#include "spbvem/polyspace.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spbvem/error.hpp"

namespace spbvem {

namespace {

/// Legendre P_n and P_n' at x in [-1, 1].
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

QuadratureRule1D gauss_legendre(int n) {
  if (n < 1) throw ValidationError("Gauss-Legendre rule needs n >= 1");
  QuadratureRule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto [p, d] = legendre(n, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    dp = legendre(n, x).second;
    // ascending order on [0,1]
    r.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

std::vector<double> gauss_lobatto_edge_nodes(int k) {
  if (k < 1) throw ValidationError("Gauss-Lobatto nodes need k >= 1");
  std::vector<double> nodes;
  // interior Lobatto nodes are the roots of P_k'
  for (int j = 1; j < k; ++j) {
    double x = -std::cos(std::numbers::pi * j / k);
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(k, x);
      const double ddp = (2.0 * x * dp - k * (k + 1) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes.push_back(0.5 * (1.0 + x));
  }
  // exact symmetry about 1/2
  for (int j = 0; j < (k - 1) / 2; ++j) {
    const double s = 0.5 * (nodes[j] + 1.0 - nodes[k - 2 - j]);
    nodes[j] = s;
    nodes[k - 2 - j] = 1.0 - s;
  }
  if ((k - 1) % 2 == 1) nodes[(k - 1) / 2] = 0.5;
  return nodes;
}

MonomialBasis::MonomialBasis(int degree, Point2 center, double h) : degree_(degree), center_(center), h_(h) {
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a) exps_.push_back({a, d - a});
}

double MonomialBasis::value(int i, Point2 x) const {
  const auto [a, b] = exps_[i];
  return std::pow((x.x - center_.x) / h_, a) * std::pow((x.y - center_.y) / h_, b);
}

Point2 MonomialBasis::gradient(int i, Point2 x) const {
  const auto [a, b] = exps_[i];
  const double sx = (x.x - center_.x) / h_, sy = (x.y - center_.y) / h_;
  const double gx = a == 0 ? 0.0 : a * std::pow(sx, a - 1) * std::pow(sy, b) / h_;
  const double gy = b == 0 ? 0.0 : b * std::pow(sx, a) * std::pow(sy, b - 1) / h_;
  return {gx, gy};
}

double MonomialBasis::laplacian(int i, Point2 x) const {
  const auto [a, b] = exps_[i];
  const double sx = (x.x - center_.x) / h_, sy = (x.y - center_.y) / h_;
  double l = 0.0;
  if (a >= 2) l += a * (a - 1) * std::pow(sx, a - 2) * std::pow(sy, b);
  if (b >= 2) l += b * (b - 1) * std::pow(sx, a) * std::pow(sy, b - 2);
  return l / (h_ * h_);
}

void MonomialBasis::values(Point2 x, std::span<double> out) const {
  const double sx = (x.x - center_.x) / h_, sy = (x.y - center_.y) / h_;
  int i = 0;
  for (int d = 0; d <= degree_; ++d) {
    // m_(d-j, j) = sx^(d-j) sy^j
    for (int j = 0; j <= d; ++j) {
      double v = 1.0;
      for (int p = 0; p < d - j; ++p) v *= sx;
      for (int p = 0; p < j; ++p) v *= sy;
      out[i++] = v;
    }
  }
}

void MonomialBasis::gradients(Point2 x, std::span<double> dx, std::span<double> dy) const {
  for (int i = 0; i < size(); ++i) {
    const Point2 g = gradient(i, x);
    dx[i] = g.x;
    dy[i] = g.y;
  }
}

void append_triangle_rule(Point2 a, Point2 b, Point2 c, int degree, ElementQuadrature& out) {
  // Duffy collapse: x = a + s (b - a) + t (1 - s) (c - a), Jacobian 2|T| (1 - s)
  const int n = degree / 2 + 2;
  const auto g = gauss_legendre(n);
  const double twice_area = cross(b - a, c - a);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = g.nodes[i], t = g.nodes[j];
      out.points.push_back(a + s * (b - a) + (t * (1.0 - s)) * (c - a));
      out.weights.push_back(twice_area * g.weights[i] * g.weights[j] * (1.0 - s));
    }
}

ElementQuadrature polygon_quadrature(std::span<const Point2> pts, int degree, int element_id) {
  ElementQuadrature q;
  q.exactness_degree = 2 * (degree / 2 + 2) - 2;
  const auto geom = polygon_geometry(pts);
  const std::size_t n = pts.size();
  bool fan_ok = true;
  for (std::size_t i = 0; i < n && fan_ok; ++i) {
    const double a = cross(pts[i] - geom.centroid, pts[(i + 1) % n] - geom.centroid);
    if (a <= 1e-12 * geom.area) fan_ok = false;
  }
  if (fan_ok) {
    for (std::size_t i = 0; i < n; ++i) append_triangle_rule(geom.centroid, pts[i], pts[(i + 1) % n], degree, q);
    return q;
  }
  try {
    for (const auto& t : ear_clip(pts)) append_triangle_rule(pts[t[0]], pts[t[1]], pts[t[2]], degree, q);
  } catch (const GeometryError& e) {
    std::ostringstream os;
    os << "element " << element_id << ": " << e.what();
    throw GeometryError(os.str());
  }
  return q;
}

}  // namespace spbvem
