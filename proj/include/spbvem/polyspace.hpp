#pragma once

#include <array>
#include <span>
#include <vector>

#include "spbvem/geometry.hpp"

namespace spbvem {

/// Dimension of P_k in two variables; 0 for k < 0.
constexpr int poly_dim(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

struct QuadratureRule1D {
  std::vector<double> nodes;  // on [0, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [0,1]; exact for degree 2n-1.
QuadratureRule1D gauss_legendre(int n);

/// The k-1 interior nodes of the (k+1)-point Gauss-Lobatto rule on (0,1).
std::vector<double> gauss_lobatto_edge_nodes(int k);

/// Scaled monomials m_b(x) = ((x - center)/h)^b, graded lexicographic order:
/// (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(int degree, Point2 center, double h);

  int degree() const { return degree_; }
  int size() const { return poly_dim(degree_); }
  Point2 center() const { return center_; }
  double h() const { return h_; }

  std::array<int, 2> exponent(int i) const { return exps_[i]; }
  /// Index of exponent (a, b); -1 if a or b is negative.
  static int index(int a, int b) {
    if (a < 0 || b < 0) return -1;
    const int d = a + b;
    return d * (d + 1) / 2 + (d - a);
  }

  double value(int i, Point2 x) const;
  Point2 gradient(int i, Point2 x) const;
  double laplacian(int i, Point2 x) const;

  /// All values at x (length size()).
  void values(Point2 x, std::span<double> out) const;
  void gradients(Point2 x, std::span<double> dx, std::span<double> dy) const;

 private:
  int degree_ = 0;
  Point2 center_;
  double h_ = 1.0;
  std::vector<std::array<int, 2>> exps_;
};

/// Quadrature over a polygon from a sub-triangulation with a collapsed
/// Gauss product rule on each triangle. All weights are positive.
struct ElementQuadrature {
  std::vector<Point2> points;
  std::vector<double> weights;
  int exactness_degree = 0;
};

/// Rule exact for polynomials up to `degree` on a triangle.
void append_triangle_rule(Point2 a, Point2 b, Point2 c, int degree, ElementQuadrature& out);

/// Fan triangulation from the centroid when it is valid, ear clipping
/// otherwise. `element_id` only feeds error messages.
ElementQuadrature polygon_quadrature(std::span<const Point2> pts, int degree, int element_id = -1);

}  // namespace spbvem
