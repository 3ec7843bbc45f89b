#pragma once

#include <span>
#include <vector>

#include "facemt/image.hpp"

namespace facemt {

struct Polyline {
  std::vector<Point2> points;
  bool closed = false;
};

/// Closed curve through `control_points` built from a periodic monotone cubic
/// Hermite spline, evaluated separately in x and y. Each segment contributes
/// `samples_per_segment` vertices, the first of which is the control point
/// itself, so the curve passes through every control point exactly and never
/// leaves the coordinate range spanned by a segment's two endpoints.
///
/// Throws DegenerateRegionError when fewer than three distinct points are
/// given, ParameterError for a non-positive sample count or non-finite input.
Polyline interpolate_boundary(std::span<const Point2> control_points, int samples_per_segment);

/// Pixels whose centres lie inside `boundary` under the even-odd rule.
/// Throws ContractViolation for an open polyline.
Mask rasterize_interior(const Polyline& boundary, int width, int height);

}  // namespace facemt
