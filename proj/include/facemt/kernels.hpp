#pragma once

// Raster kernels in two flavours with identical contracts:
//   serial::  straightforward single-threaded reference, kept for testing
//   omp::     OpenMP row-parallel versions used by the public API
// Both must produce bit-identical output; tests/test_imaging.cpp checks this.
// Parameter validation happens in the public wrappers (filters.hpp,
// geometry.hpp); kernels assume valid input.

#include <span>
#include <vector>

#include "facemt/image.hpp"

namespace facemt::kernels {

/// Normalised 1-D Gaussian taps, radius ceil(3 sigma). sigma must be > 0.
std::vector<double> gaussian_taps(double sigma);

/// Symmetric reflection of an out-of-range index into [0, n): ...cba|abc...|cba...
int reflect_index(int i, int n) noexcept;

namespace serial {

void rasterize_even_odd(std::span<const Point2> polygon, Mask& out);
Image gaussian_blur(const Image& image, double sigma, const Mask* mask);
Image alpha_blend(const Image& base, Rgb color, const Mask& mask, double alpha);

}  // namespace serial

namespace omp {

void rasterize_even_odd(std::span<const Point2> polygon, Mask& out);
Image gaussian_blur(const Image& image, double sigma, const Mask* mask);
Image alpha_blend(const Image& base, Rgb color, const Mask& mask, double alpha);

}  // namespace omp

}  // namespace facemt::kernels
