#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "facemt/errors.hpp"
#include "facemt/filters.hpp"
#include "facemt/geometry.hpp"
#include "facemt/image.hpp"
#include "facemt/kernels.hpp"
#include "facemt/png_io.hpp"

using namespace facemt;

namespace {

// Classic crossing-number test, written independently of the library.
bool pnpoly(const std::vector<Point2>& poly, double x, double y) {
  bool c = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    if (((poly[i].y > y) != (poly[j].y > y)) &&
        (x < (poly[j].x - poly[i].x) * (y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)) {
      c = !c;
    }
  }
  return c;
}

Image random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng() & 0xff);
  return Image(w, h, std::move(px));
}

Mask random_mask(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Mask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, rng() % 3 == 0);
  return m;
}

Polyline closed(std::vector<Point2> pts) { return Polyline{std::move(pts), true}; }

}  // namespace

TEST(ImageTest, ConstructorValidatesBufferSize) {
  EXPECT_THROW(Image(2, 2, std::vector<std::uint8_t>(11)), ParameterError);
  EXPECT_THROW(Image(0, 3), ParameterError);
  Image img(3, 2, Rgb{1, 2, 3});
  EXPECT_EQ(img.at(2, 1), (Rgb{1, 2, 3}));
  img.set(0, 0, {9, 8, 7});
  EXPECT_EQ(img.at(0, 0), (Rgb{9, 8, 7}));
}

TEST(ImageTest, ToChannelRoundsHalfAwayAndClamps) {
  EXPECT_EQ(to_channel(2.5), 3);
  EXPECT_EQ(to_channel(2.4999), 2);
  EXPECT_EQ(to_channel(-3.0), 0);
  EXPECT_EQ(to_channel(300.0), 255);
}

TEST(ImageTest, MeanIntensityAndDiffMask) {
  Image a(4, 1, Rgb{0, 0, 0});
  a.set(0, 0, {255, 255, 255});
  a.set(1, 0, {255, 255, 255});
  EXPECT_DOUBLE_EQ(mean_intensity(a), 127.5);
  Image b = a;
  b.set(3, 0, {0, 1, 0});
  const Mask d = diff_mask(a, b);
  EXPECT_EQ(d.popcount(), 1u);
  EXPECT_TRUE(d.test(3, 0));
}

TEST(MaskTest, DilationMatchesBruteForce) {
  const Mask m = random_mask(23, 17, 5);
  for (int r : {0, 1, 3}) {
    const Mask d = m.dilated(r);
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        bool expect = false;
        for (int dy = -r; dy <= r && !expect; ++dy)
          for (int dx = -r; dx <= r && !expect; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (xx >= 0 && yy >= 0 && xx < m.width() && yy < m.height() && m.test(xx, yy)) expect = true;
          }
        ASSERT_EQ(d.test(x, y), expect) << x << "," << y << " r=" << r;
      }
    }
  }
}

TEST(KernelsTest, ReflectIndex) {
  EXPECT_EQ(kernels::reflect_index(-1, 5), 0);
  EXPECT_EQ(kernels::reflect_index(-2, 5), 1);
  EXPECT_EQ(kernels::reflect_index(5, 5), 4);
  EXPECT_EQ(kernels::reflect_index(6, 5), 3);
  EXPECT_EQ(kernels::reflect_index(10, 5), 0);
  EXPECT_EQ(kernels::reflect_index(-7, 1), 0);
}

TEST(KernelsTest, GaussianTapsAreNormalised) {
  const auto taps = kernels::gaussian_taps(1.5);
  ASSERT_EQ(taps.size(), 2u * 5 + 1);
  double sum = 0;
  for (double t : taps) sum += t;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(taps.front(), taps.back());
}

TEST(KernelsTest, SerialAndParallelAreBitIdentical) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Image img = random_image(37 + static_cast<int>(seed), 29, seed);
    const Mask mask = random_mask(img.width(), img.height(), seed + 100);
    for (double sigma : {0.7, 2.0}) {
      EXPECT_EQ(kernels::serial::gaussian_blur(img, sigma, nullptr), kernels::omp::gaussian_blur(img, sigma, nullptr));
      EXPECT_EQ(kernels::serial::gaussian_blur(img, sigma, &mask), kernels::omp::gaussian_blur(img, sigma, &mask));
    }
    EXPECT_EQ(kernels::serial::alpha_blend(img, {10, 200, 30}, mask, 0.37),
              kernels::omp::alpha_blend(img, {10, 200, 30}, mask, 0.37));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-5.0, 45.0);
    std::vector<Point2> poly(7);
    for (auto& p : poly) p = {coord(rng), coord(rng)};
    Mask a(img.width(), img.height()), b(img.width(), img.height());
    kernels::serial::rasterize_even_odd(poly, a);
    kernels::omp::rasterize_even_odd(poly, b);
    EXPECT_EQ(a, b);
  }
}

TEST(InterpolateTest, TriangleWithOneSampleIsIdentity) {
  const std::vector<Point2> tri = {{0, 0}, {10, 0}, {5, 8}};
  const Polyline p = interpolate_boundary(tri, 1);
  EXPECT_TRUE(p.closed);
  EXPECT_EQ(p.points, tri);
}

TEST(InterpolateTest, SquareMidpointsLieOnEdges) {
  const std::vector<Point2> sq = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  const Polyline p = interpolate_boundary(sq, 2);
  ASSERT_EQ(p.points.size(), 8u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(p.points[2 * i], sq[i]);
    const Point2 a = sq[i], b = sq[(i + 1) % 4];
    const Point2 m = p.points[2 * i + 1];
    EXPECT_NEAR(m.x, (a.x + b.x) / 2, 1e-6);
    EXPECT_NEAR(m.y, (a.y + b.y) / 2, 1e-6);
  }
}

TEST(InterpolateTest, StaysInsideSegmentBoundingBoxes) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(0.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point2> ctl(6);
    for (auto& c : ctl) c = {coord(rng), coord(rng)};
    const int s = 7;
    const Polyline p = interpolate_boundary(ctl, s);
    ASSERT_EQ(p.points.size(), ctl.size() * s);
    for (std::size_t seg = 0; seg < ctl.size(); ++seg) {
      const Point2 a = ctl[seg], b = ctl[(seg + 1) % ctl.size()];
      for (int k = 0; k < s; ++k) {
        const Point2 q = p.points[seg * s + k];
        EXPECT_GE(q.x, std::min(a.x, b.x) - 1e-9);
        EXPECT_LE(q.x, std::max(a.x, b.x) + 1e-9);
        EXPECT_GE(q.y, std::min(a.y, b.y) - 1e-9);
        EXPECT_LE(q.y, std::max(a.y, b.y) + 1e-9);
      }
    }
  }
}

TEST(InterpolateTest, RejectsDegenerateAndBadParameters) {
  const std::vector<Point2> two = {{0, 0}, {1, 1}, {0, 0}};
  EXPECT_THROW(interpolate_boundary(two, 4), DegenerateRegionError);
  const std::vector<Point2> tri = {{0, 0}, {10, 0}, {5, 8}};
  EXPECT_THROW(interpolate_boundary(tri, 0), ParameterError);
  const std::vector<Point2> nan = {{0, 0}, {10, 0}, {std::nan(""), 8}};
  EXPECT_THROW(interpolate_boundary(nan, 2), ParameterError);
}

TEST(RasterizeTest, RectangleCoversSixteenPixels) {
  const Mask m = rasterize_interior(closed({{2, 2}, {6, 2}, {6, 6}, {2, 6}}), 10, 10);
  EXPECT_EQ(m.popcount(), 16u);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) EXPECT_EQ(m.test(x, y), x >= 2 && x <= 5 && y >= 2 && y <= 5);
}

TEST(RasterizeTest, FullCoverageAndClipping) {
  EXPECT_EQ(rasterize_interior(closed({{-1, -1}, {11, -1}, {11, 11}, {-1, 11}}), 10, 10).popcount(), 100u);
  EXPECT_TRUE(rasterize_interior(closed({{20, 20}, {30, 20}, {25, 28}}), 10, 10).empty());
  EXPECT_THROW(rasterize_interior(Polyline{{{0, 0}, {5, 0}, {0, 5}}, false}, 10, 10), ContractViolation);
}

TEST(RasterizeTest, AgreesWithBruteForceOnRandomPolygons) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 32), h = 1 + static_cast<int>(rng() % 32);
    const int n = 3 + static_cast<int>(rng() % 6);
    std::uniform_real_distribution<double> cx(-4.0, w + 4.0), cy(-4.0, h + 4.0);
    std::vector<Point2> poly(n);
    for (auto& p : poly) p = {cx(rng), cy(rng)};
    const Mask m = rasterize_interior(closed(poly), w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) ASSERT_EQ(m.test(x, y), pnpoly(poly, x + 0.5, y + 0.5));
  }
}

TEST(BlurTest, ConstantImageIsUnchanged) {
  const Image img(19, 13, Rgb{77, 140, 3});
  EXPECT_EQ(gaussian_blur(img, 2.5), img);
}

TEST(BlurTest, SigmaZeroIsBitExactCopy) {
  const Image img = random_image(9, 9, 4);
  EXPECT_EQ(gaussian_blur(img, 0.0), img);
}

TEST(BlurTest, ImpulseCentreMatchesNormalisedWeight) {
  Image img(21, 21, Rgb{0, 0, 0});
  img.set(10, 10, {255, 255, 255});
  const Image out = gaussian_blur(img, 1.0);
  double sum = 0;
  for (int k = -3; k <= 3; ++k) sum += std::exp(-k * k / 2.0);
  const double w0 = 1.0 / sum;
  const auto expect = static_cast<std::uint8_t>(std::lround(255.0 * w0 * w0));
  EXPECT_EQ(expect, 41);
  EXPECT_EQ(out.at(10, 10).r, expect);
}

TEST(BlurTest, MaskRestrictsWrites) {
  const Image img = random_image(30, 20, 8);
  const Mask mask = random_mask(30, 20, 9);
  const Image out = gaussian_blur(img, 1.5, &mask);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) {
      if (!mask.test(x, y)) {
        ASSERT_EQ(out.at(x, y), img.at(x, y));
      }
    }
  }
}

TEST(BlurTest, RejectsBadInput) {
  const Image img(4, 4);
  EXPECT_THROW(gaussian_blur(img, -1.0), ParameterError);
  EXPECT_THROW(gaussian_blur(img, std::nan("")), ParameterError);
  const Mask wrong(5, 4);
  EXPECT_THROW(gaussian_blur(img, 1.0, &wrong), ContractViolation);
  EXPECT_EQ(blur_radius(1.0), 3);
  EXPECT_EQ(blur_radius(2.0), 6);
  EXPECT_EQ(blur_radius(0.0), 0);
}

TEST(BlendTest, StatedArithmetic) {
  const Image base(2, 1, Rgb{100, 100, 100});
  Mask m(2, 1);
  m.set(0, 0);
  const Image out = alpha_blend(base, {200, 0, 0}, m, 0.5);
  EXPECT_EQ(out.at(0, 0), (Rgb{150, 50, 50}));
  EXPECT_EQ(out.at(1, 0), (Rgb{100, 100, 100}));
}

TEST(BlendTest, IdentityAndReplacement) {
  const Image base = random_image(8, 8, 2);
  const Mask m = random_mask(8, 8, 3);
  EXPECT_EQ(alpha_blend(base, {1, 2, 3}, m, 0.0), base);
  const Image full = alpha_blend(base, {1, 2, 3}, m, 1.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_EQ(full.at(x, y), (m.test(x, y) ? Rgb{1, 2, 3} : base.at(x, y)));
  EXPECT_THROW(alpha_blend(base, {1, 2, 3}, m, 1.5), ParameterError);
}

TEST(PngTest, RoundTripsThroughMemoryAndDisk) {
  const Image img = random_image(13, 7, 21);
  EXPECT_EQ(decode_png(encode_png(img)), img);
  const auto dir = std::filesystem::temp_directory_path() / "facemt_png_test";
  std::filesystem::remove_all(dir);
  write_png(dir / "nested" / "x.png", img);
  EXPECT_EQ(read_png(dir / "nested" / "x.png"), img);
  std::filesystem::remove_all(dir);
}

TEST(PngTest, FailuresNameThePath) {
  try {
    read_png("/nonexistent/facemt.png");
    FAIL() << "expected ImageIoError";
  } catch (const ImageIoError& e) {
    EXPECT_EQ(e.path(), "/nonexistent/facemt.png");
  }
  EXPECT_THROW(decode_png({1, 2, 3, 4}), ImageIoError);
}
