#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace facemt {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Owned 8-bit RGB raster, row-major, three interleaved channels per pixel.
class Image {
 public:
  Image(int width, int height, Rgb fill = {});
  Image(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  Rgb at(int x, int y) const noexcept {
    const std::size_t i = offset(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    const std::size_t i = offset(x, y);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

/// Per-pixel membership flags. Stored one byte per pixel so that parallel
/// kernels can write disjoint rows without sharing words.
class Mask {
 public:
  Mask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool test(int x, int y) const noexcept { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool on = true) noexcept { bits_[index(x, y)] = on ? 1 : 0; }

  std::size_t popcount() const noexcept;
  bool empty() const noexcept { return popcount() == 0; }
  bool same_shape(const Image& image) const noexcept {
    return image.width() == width_ && image.height() == height_;
  }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  Mask& operator|=(const Mask& other);
  Mask& subtract(const Mask& other);
  /// Square (Chebyshev) dilation; radius 0 returns a copy.
  Mask dilated(int radius) const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Pixels whose RGB value differs between two equally sized images.
Mask diff_mask(const Image& a, const Image& b);

/// Mean over all pixels of the per-pixel channel mean.
double mean_intensity(const Image& image);

/// Half-away-from-zero rounding followed by clamping into [0,255].
std::uint8_t to_channel(double value) noexcept;

}  // namespace facemt
