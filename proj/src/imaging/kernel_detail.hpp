#pragma once

// Per-row / per-pixel arithmetic shared by the serial and OpenMP kernels.
// Keeping the floating-point expressions in one place is what makes the two
// flavours bit-identical: only the loop scheduling differs between them.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "facemt/image.hpp"
#include "facemt/kernels.hpp"

namespace facemt::kernels::detail {

/// Sorted x positions where the horizontal line y = yc crosses polygon edges.
/// Edge orientation and the intersection expression follow the classic
/// crossing-number test so results agree with a per-pixel evaluation.
inline void row_crossings(std::span<const Point2> poly, double yc, std::vector<double>& xs) {
  xs.clear();
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y > yc) != (b.y > yc)) {
      xs.push_back((b.x - a.x) * (yc - a.y) / (b.y - a.y) + a.x);
    }
  }
  std::sort(xs.begin(), xs.end());
}

/// First pixel column whose centre satisfies x + 0.5 >= bound.
inline int first_center_at_or_after(double bound, int width) {
  const double guess = std::clamp(std::ceil(bound - 0.5), -1.0, static_cast<double>(width) + 1.0);
  int x = std::clamp(static_cast<int>(guess), 0, width);
  while (x < width && x + 0.5 < bound) ++x;
  while (x > 0 && (x - 1) + 0.5 >= bound) --x;
  return x;
}

/// Marks pixels of row y whose centres fall in [xs[2k], xs[2k+1]).
inline void fill_row(const std::vector<double>& xs, int y, Mask& out) {
  const int width = out.width();
  for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
    const int x0 = first_center_at_or_after(xs[k], width);
    const int x1 = first_center_at_or_after(xs[k + 1], width);
    for (int x = x0; x < x1; ++x) out.set(x, y);
  }
}

/// Row range [lo, hi) that can contain interior pixel centres.
inline std::pair<int, int> candidate_rows(std::span<const Point2> poly, int height) {
  double ymin = poly.front().y;
  double ymax = ymin;
  for (const auto& p : poly) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int lo = first_center_at_or_after(ymin, height);
  const int hi = std::min(height, first_center_at_or_after(ymax, height) + 1);
  return {lo, std::max(lo, hi)};
}

inline Rgb blend_pixel(Rgb base, Rgb color, double alpha) noexcept {
  const double keep = 1.0 - alpha;
  return {to_channel(keep * base.r + alpha * color.r), to_channel(keep * base.g + alpha * color.g),
          to_channel(keep * base.b + alpha * color.b)};
}

/// Horizontal pass for one row into `tmp` (w * 3 doubles per row).
inline void blur_row(const Image& image, std::span<const double> taps, int y, double* tmp_row) {
  const int width = image.width();
  const int radius = static_cast<int>(taps.size() / 2);
  const auto px = image.data();
  const std::size_t row_base = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) * 3;
  for (int x = 0; x < width; ++x) {
    double acc[3] = {0.0, 0.0, 0.0};
    for (int k = -radius; k <= radius; ++k) {
      const std::size_t src = row_base + static_cast<std::size_t>(reflect_index(x + k, width)) * 3;
      const double w = taps[static_cast<std::size_t>(k + radius)];
      acc[0] += w * px[src];
      acc[1] += w * px[src + 1];
      acc[2] += w * px[src + 2];
    }
    tmp_row[x * 3] = acc[0];
    tmp_row[x * 3 + 1] = acc[1];
    tmp_row[x * 3 + 2] = acc[2];
  }
}

/// Vertical pass for one pixel reading the horizontally blurred buffer.
inline Rgb blur_column_at(const std::vector<double>& tmp, std::span<const double> taps, int x, int y,
                          int width, int height) {
  const int radius = static_cast<int>(taps.size() / 2);
  double acc[3] = {0.0, 0.0, 0.0};
  for (int k = -radius; k <= radius; ++k) {
    const std::size_t src = (static_cast<std::size_t>(reflect_index(y + k, height)) *
                                 static_cast<std::size_t>(width) +
                             static_cast<std::size_t>(x)) * 3;
    const double w = taps[static_cast<std::size_t>(k + radius)];
    acc[0] += w * tmp[src];
    acc[1] += w * tmp[src + 1];
    acc[2] += w * tmp[src + 2];
  }
  return {to_channel(acc[0]), to_channel(acc[1]), to_channel(acc[2])};
}

/// Rows whose horizontal pass is read by at least one masked output pixel.
inline std::vector<std::uint8_t> rows_needed(const Mask* mask, int height, int radius) {
  std::vector<std::uint8_t> need(static_cast<std::size_t>(height), mask == nullptr ? 1 : 0);
  if (mask == nullptr) return need;
  for (int y = 0; y < height; ++y) {
    bool any = false;
    for (int x = 0; x < mask->width() && !any; ++x) any = mask->test(x, y);
    if (!any) continue;
    for (int k = -radius; k <= radius; ++k) need[static_cast<std::size_t>(reflect_index(y + k, height))] = 1;
  }
  return need;
}

}  // namespace facemt::kernels::detail
