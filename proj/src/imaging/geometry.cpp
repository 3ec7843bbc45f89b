#include "facemt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "facemt/errors.hpp"
#include "facemt/kernels.hpp"

namespace facemt {

namespace {

std::size_t distinct_count(std::span<const Point2> pts) {
  std::vector<Point2> sorted(pts.begin(), pts.end());
  std::sort(sorted.begin(), sorted.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

// Periodic monotone tangents: zero at local extrema, weighted harmonic mean of
// neighbouring slopes elsewhere. With unit parameter spacing this keeps
// |m| <= 2 * min(|d_left|, |d_right|), inside the Fritsch-Carlson region.
std::vector<double> monotone_tangents(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> slope(n);
  for (std::size_t k = 0; k < n; ++k) slope[k] = v[(k + 1) % n] - v[k];
  std::vector<double> m(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double left = slope[(k + n - 1) % n];
    const double right = slope[k];
    if (left * right > 0.0) m[k] = 2.0 * left * right / (left + right);
  }
  return m;
}

double hermite(double p0, double p1, double m0, double m1, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * p1 +
         (t3 - t2) * m1;
}

}  // namespace

Polyline interpolate_boundary(std::span<const Point2> control_points, int samples_per_segment) {
  if (samples_per_segment < 1) {
    throw ParameterError("samples_per_segment must be positive, got " +
                         std::to_string(samples_per_segment));
  }
  for (const auto& p : control_points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ParameterError("non-finite control point");
    }
  }
  if (distinct_count(control_points) < 3) {
    throw DegenerateRegionError("boundary needs at least 3 distinct control points");
  }

  const std::size_t n = control_points.size();
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = control_points[i].x;
    ys[i] = control_points[i].y;
  }
  const auto mx = monotone_tangents(xs);
  const auto my = monotone_tangents(ys);

  Polyline out;
  out.closed = true;
  out.points.reserve(n * static_cast<std::size_t>(samples_per_segment));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t next = (k + 1) % n;
    out.points.push_back(control_points[k]);
    for (int s = 1; s < samples_per_segment; ++s) {
      const double t = static_cast<double>(s) / samples_per_segment;
      out.points.push_back({hermite(xs[k], xs[next], mx[k], mx[next], t),
                            hermite(ys[k], ys[next], my[k], my[next], t)});
    }
  }
  return out;
}

Mask rasterize_interior(const Polyline& boundary, int width, int height) {
  if (!boundary.closed) throw ContractViolation("rasterize_interior needs a closed polyline");
  if (boundary.points.size() < 3) throw ContractViolation("closed polyline needs at least 3 points");
  Mask mask(width, height);
  kernels::omp::rasterize_even_odd(boundary.points, mask);
  return mask;
}

}  // namespace facemt
