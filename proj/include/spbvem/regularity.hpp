#pragma once

#include <span>
#include <vector>

#include "spbvem/mesh.hpp"

namespace spbvem {

/// Shape-regularity summary of a mesh.
///
/// delta0_star_shaped is the largest ratio r/h_P such that every element is
/// star-shaped with respect to a disc of radius r; delta0_edge is the
/// smallest |E|/h_P over all element edges.
struct RegularityReport {
  double delta0_star_shaped = 0.0;
  double delta0_edge = 0.0;
  int worst_element_id = -1;
  bool passed = false;
};

/// Kernel of a simple CCW polygon: intersection of the inner half-planes of
/// its edges. Empty if the polygon is not star-shaped.
std::vector<Point2> polygon_kernel(std::span<const Point2> pts);

/// Radius of the largest disc inside the kernel (0 when the kernel is empty).
double kernel_inscribed_radius(std::span<const Point2> pts);

RegularityReport check_regularity(const PolygonalMesh& mesh, double delta0);

}  // namespace spbvem
