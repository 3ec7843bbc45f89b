#include "facemt/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "facemt/errors.hpp"

namespace facemt {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ParameterError("image dimensions must be positive, got " + std::to_string(width) +
                         "x" + std::to_string(height));
  }
}

}  // namespace

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.resize(pixel_count() * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Image::Image(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), data_(std::move(pixels)) {
  check_dims(width, height);
  if (data_.size() != pixel_count() * 3) {
    throw ParameterError("pixel buffer holds " + std::to_string(data_.size()) +
                         " bytes, expected " + std::to_string(pixel_count() * 3));
  }
}

Mask::Mask(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t Mask::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask& Mask::operator|=(const Mask& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw ContractViolation("mask union with mismatched dimensions");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

Mask& Mask::subtract(const Mask& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw ContractViolation("mask difference with mismatched dimensions");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= static_cast<std::uint8_t>(!other.bits_[i]);
  return *this;
}

Mask Mask::dilated(int radius) const {
  if (radius <= 0) return *this;
  // Separable max filter: rows, then columns.
  Mask rows(width_, height_);
  for (int y = 0; y < height_; ++y) {
    int last_on = -1 - radius;
    // forward pass marks pixels within radius to the right of a set pixel
    for (int x = 0; x < width_; ++x) {
      if (test(x, y)) last_on = x;
      if (x - last_on <= radius) rows.set(x, y);
    }
    int next_on = width_ + radius + 1;
    for (int x = width_ - 1; x >= 0; --x) {
      if (test(x, y)) next_on = x;
      if (next_on - x <= radius) rows.set(x, y);
    }
  }
  Mask out(width_, height_);
  for (int x = 0; x < width_; ++x) {
    int last_on = -1 - radius;
    for (int y = 0; y < height_; ++y) {
      if (rows.test(x, y)) last_on = y;
      if (y - last_on <= radius) out.set(x, y);
    }
    int next_on = height_ + radius + 1;
    for (int y = height_ - 1; y >= 0; --y) {
      if (rows.test(x, y)) next_on = y;
      if (next_on - y <= radius) out.set(x, y);
    }
  }
  return out;
}

Mask diff_mask(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ContractViolation("diff of images with different dimensions");
  }
  Mask out(a.width(), a.height());
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (a.at(x, y) != b.at(x, y)) out.set(x, y);
    }
  }
  return out;
}

double mean_intensity(const Image& image) {
  double sum = 0.0;
  for (const auto v : image.data()) sum += v;
  return sum / static_cast<double>(image.data().size());
}

std::uint8_t to_channel(double value) noexcept {
  const double r = std::round(value);  // std::round is half-away-from-zero
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

}  // namespace facemt
