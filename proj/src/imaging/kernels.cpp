#include "facemt/kernels.hpp"

#include <cmath>

#include "kernel_detail.hpp"

namespace facemt::kernels {

std::vector<double> gaussian_taps(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (auto& w : taps) w /= sum;
  return taps;
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

namespace serial {

void rasterize_even_odd(std::span<const Point2> polygon, Mask& out) {
  const auto [lo, hi] = detail::candidate_rows(polygon, out.height());
  std::vector<double> xs;
  for (int y = lo; y < hi; ++y) {
    detail::row_crossings(polygon, y + 0.5, xs);
    detail::fill_row(xs, y, out);
  }
}

Image gaussian_blur(const Image& image, double sigma, const Mask* mask) {
  if (sigma <= 0.0) return image;
  const auto taps = gaussian_taps(sigma);
  const int w = image.width();
  const int h = image.height();
  const auto need = detail::rows_needed(mask, h, static_cast<int>(taps.size() / 2));

  std::vector<double> tmp(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0.0);
  for (int y = 0; y < h; ++y) {
    if (need[static_cast<std::size_t>(y)]) {
      detail::blur_row(image, taps, y, tmp.data() + static_cast<std::size_t>(y) * w * 3);
    }
  }
  Image out = image;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask != nullptr && !mask->test(x, y)) continue;
      out.set(x, y, detail::blur_column_at(tmp, taps, x, y, w, h));
    }
  }
  return out;
}

Image alpha_blend(const Image& base, Rgb color, const Mask& mask, double alpha) {
  Image out = base;
  for (int y = 0; y < base.height(); ++y) {
    for (int x = 0; x < base.width(); ++x) {
      if (mask.test(x, y)) out.set(x, y, detail::blend_pixel(base.at(x, y), color, alpha));
    }
  }
  return out;
}

}  // namespace serial

namespace omp {

void rasterize_even_odd(std::span<const Point2> polygon, Mask& out) {
  const auto [lo, hi] = detail::candidate_rows(polygon, out.height());
#pragma omp parallel
  {
    std::vector<double> xs;
#pragma omp for schedule(static)
    for (int y = lo; y < hi; ++y) {
      detail::row_crossings(polygon, y + 0.5, xs);
      detail::fill_row(xs, y, out);
    }
  }
}

Image gaussian_blur(const Image& image, double sigma, const Mask* mask) {
  if (sigma <= 0.0) return image;
  const auto taps = gaussian_taps(sigma);
  const int w = image.width();
  const int h = image.height();
  const auto need = detail::rows_needed(mask, h, static_cast<int>(taps.size() / 2));

  std::vector<double> tmp(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0.0);
  Image out = image;
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      if (need[static_cast<std::size_t>(y)]) {
        detail::blur_row(image, taps, y, tmp.data() + static_cast<std::size_t>(y) * w * 3);
      }
    }
    // implicit barrier: every row of tmp is complete before the column pass
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (mask != nullptr && !mask->test(x, y)) continue;
        out.set(x, y, detail::blur_column_at(tmp, taps, x, y, w, h));
      }
    }
  }
  return out;
}

Image alpha_blend(const Image& base, Rgb color, const Mask& mask, double alpha) {
  Image out = base;
  const int w = base.width();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < base.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.test(x, y)) out.set(x, y, detail::blend_pixel(base.at(x, y), color, alpha));
    }
  }
  return out;
}

}  // namespace omp

}  // namespace facemt::kernels
