#pragma once

#include "facemt/image.hpp"

namespace facemt {

/// Separable Gaussian blur, radius ceil(3 sigma), reflect-at-edge borders.
/// With a mask only masked pixels are rewritten; reads may cross the mask
/// edge. sigma == 0 returns the input unchanged. Negative or non-finite sigma
/// throws ParameterError; a mask of the wrong shape throws ContractViolation.
Image gaussian_blur(const Image& image, double sigma, const Mask* mask = nullptr);

/// Kernel radius used by gaussian_blur for `sigma`.
int blur_radius(double sigma);

/// out = round((1 - alpha) * base + alpha * color) on masked pixels.
Image alpha_blend(const Image& base, Rgb color, const Mask& mask, double alpha);

}  // namespace facemt
