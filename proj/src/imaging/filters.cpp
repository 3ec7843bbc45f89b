#include "facemt/filters.hpp"

#include <cmath>
#include <string>

#include "facemt/errors.hpp"
#include "facemt/kernels.hpp"

namespace facemt {

int blur_radius(double sigma) {
  return sigma > 0.0 ? static_cast<int>(std::ceil(3.0 * sigma)) : 0;
}

Image gaussian_blur(const Image& image, double sigma, const Mask* mask) {
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw ParameterError("blur sigma must be finite and >= 0, got " + std::to_string(sigma));
  }
  if (mask != nullptr && !mask->same_shape(image)) {
    throw ContractViolation("blur mask dimensions differ from image");
  }
  if (sigma == 0.0) return image;
  return kernels::omp::gaussian_blur(image, sigma, mask);
}

Image alpha_blend(const Image& base, Rgb color, const Mask& mask, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ParameterError("alpha must lie in [0,1], got " + std::to_string(alpha));
  }
  if (!mask.same_shape(base)) throw ContractViolation("blend mask dimensions differ from image");
  return kernels::omp::alpha_blend(base, color, mask, alpha);
}

}  // namespace facemt
