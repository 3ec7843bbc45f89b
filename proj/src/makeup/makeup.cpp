#include "facemt/makeup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facemt/errors.hpp"
#include "facemt/filters.hpp"
#include "facemt/geometry.hpp"

namespace facemt {

namespace {

std::vector<Point2> pick(const LandmarkSet& lm, std::initializer_list<int> indices) {
  std::vector<Point2> out;
  out.reserve(indices.size());
  for (const int i : indices) out.push_back(lm[static_cast<std::size_t>(i)]);
  return out;
}

Point2 midpoint(const Point2& a, const Point2& b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

// Upper eyelid strip: lid points left to right, then the same points lifted
// by `lift` in reverse order.
std::vector<Point2> lid_strip(std::vector<Point2> lid, double lift) {
  std::vector<Point2> poly = lid;
  for (auto it = lid.rbegin(); it != lid.rend(); ++it) poly.push_back({it->x, it->y - lift});
  return poly;
}

std::vector<Point2> ellipse(Point2 center, double rx, double ry) {
  std::vector<Point2> pts;
  for (int k = 0; k < 8; ++k) {
    const double t = k * std::numbers::pi / 4.0;
    pts.push_back({center.x + rx * std::cos(t), center.y + ry * std::sin(t)});
  }
  return pts;
}

Mask polygon_mask(const std::vector<Point2>& control, int width, int height, int samples) {
  try {
    return rasterize_interior(interpolate_boundary(control, samples), width, height);
  } catch (const DegenerateRegionError&) {
    return Mask(width, height);
  }
}

}  // namespace

PixelRect adaptive_sample_rect(const LandmarkSet& lm, int width, int height, double shrink) {
  const Point2 brow_r = lm[21];
  const Point2 brow_l = lm[22];
  const Point2 bridge = lm[27];
  double x_lo = std::min(brow_r.x, brow_l.x);
  double x_hi = std::max(brow_r.x, brow_l.x);
  double y_lo = std::min({brow_r.y, brow_l.y, bridge.y});
  double y_hi = std::max(std::min(brow_r.y, brow_l.y), bridge.y);
  const double dx = shrink * (x_hi - x_lo);
  const double dy = shrink * (y_hi - y_lo);
  x_lo += dx;
  x_hi -= dx;
  y_lo += dy;
  y_hi -= dy;

  // pixels whose centres lie within the closed rectangle
  auto first = [](double lo, int n) { return std::clamp(static_cast<int>(std::ceil(lo - 0.5)), 0, n); };
  auto past = [](double hi, int n) { return std::clamp(static_cast<int>(std::floor(hi - 0.5)) + 1, 0, n); };
  PixelRect r{first(x_lo, width), first(y_lo, height), past(x_hi, width), past(y_hi, height)};
  if (r.x1 < r.x0) r.x1 = r.x0;
  if (r.y1 < r.y0) r.y1 = r.y0;
  return r;
}

AdaptiveColorSample extract_adaptive_color(const Image& image, const LandmarkSet& landmarks, double shrink) {
  const PixelRect rect = adaptive_sample_rect(landmarks, image.width(), image.height(), shrink);
  if (rect.area() < 4) {
    throw SampleFailedError("adaptive colour sample rectangle covers " + std::to_string(rect.area()) +
                            " px (need >= 4)");
  }
  std::array<double, 3> sum{};
  for (int y = rect.y0; y < rect.y1; ++y) {
    for (int x = rect.x0; x < rect.x1; ++x) {
      const Rgb c = image.at(x, y);
      sum[0] += c.r;
      sum[1] += c.g;
      sum[2] += c.b;
    }
  }
  const double n = rect.area();
  AdaptiveColorSample s;
  s.mean_rgb = {sum[0] / n, sum[1] / n, sum[2] / n};
  s.mean_intensity = (sum[0] + sum[1] + sum[2]) / (3.0 * n);
  return s;
}

SkinTone classify_skin_tone(double intensity, const SkinToneThresholds& thresholds) {
  if (!(intensity >= 0.0 && intensity <= 255.0)) {
    throw ParameterError("skin intensity must lie in [0,255], got " + std::to_string(intensity));
  }
  if (intensity >= thresholds.light_min) return SkinTone::Light;
  if (intensity >= thresholds.medium_min) return SkinTone::Medium;
  return SkinTone::Deep;
}

ComponentStyle resolve_component_style(Component component, IntensityLevel level, SkinTone tone,
                                       const AdaptiveColorSample* sample, const StyleConfig& style) {
  if (level != IntensityLevel::Adaptive) return style.cell(component, level, tone);
  if (sample == nullptr) throw ParameterError("adaptive makeup needs a skin colour sample");

  const ComponentStyle& base = style.cell(component, IntensityLevel::Light, tone);
  const double tint = style.adaptive_tint();
  auto toward = [tint](std::uint8_t from, double to) { return to_channel(from + tint * (to - from)); };
  ComponentStyle out;
  out.alpha = base.alpha * std::clamp(sample->mean_intensity / 255.0, 0.0, 1.0);
  out.color = {toward(base.color.r, sample->mean_rgb[0]), toward(base.color.g, sample->mean_rgb[1]),
               toward(base.color.b, sample->mean_rgb[2])};
  return out;
}

std::vector<std::vector<Point2>> component_polygons(Component component, const LandmarkSet& lm,
                                                    const MakeupGeometry& geometry) {
  const double iod = inter_ocular_distance(lm);
  switch (component) {
    case Component::Eyeliner: {
      const double lift = geometry.eyeliner_extrusion * iod;
      return {lid_strip(pick(lm, {36, 37, 38, 39}), lift), lid_strip(pick(lm, {42, 43, 44, 45}), lift)};
    }
    case Component::Eyeshadow:
      return {pick(lm, {36, 37, 38, 39, 21, 20, 19, 18, 17}), pick(lm, {42, 43, 44, 45, 26, 25, 24, 23, 22})};
    case Component::Blush: {
      const double rx = geometry.blush_radius * iod;
      const double ry = rx * geometry.blush_aspect;
      return {ellipse(midpoint(lm[2], lm[31]), rx, ry), ellipse(midpoint(lm[14], lm[35]), rx, ry)};
    }
    case Component::Lipstick:
      return {region_points(lm, FaceRegion::OuterLip), region_points(lm, FaceRegion::InnerLip)};
  }
  return {};
}

Mask component_mask(Component component, const LandmarkSet& landmarks, int width, int height,
                    const MakeupGeometry& geometry) {
  const auto polys = component_polygons(component, landmarks, geometry);
  const int samples = geometry.samples_per_segment;
  if (component == Component::Lipstick) {
    Mask lips = polygon_mask(polys[0], width, height, samples);
    lips.subtract(polygon_mask(polys[1], width, height, samples));
    return lips;
  }
  Mask mask(width, height);
  for (const auto& poly : polys) mask |= polygon_mask(poly, width, height, samples);
  return mask;
}

ComponentResult apply_component(const Image& image, const LandmarkSet& landmarks, Component component, Rgb color,
                                double alpha, double blur_sigma, const MakeupGeometry& geometry) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0,1]");
  if (!std::isfinite(blur_sigma) || blur_sigma < 0.0) throw ParameterError("blur sigma must be >= 0");

  const Mask mask = component_mask(component, landmarks, image.width(), image.height(), geometry);
  if (mask.empty()) return {image, Mask(image.width(), image.height()), true};
  // Zero opacity deposits nothing, so there is nothing to smooth either.
  if (alpha == 0.0) return {image, Mask(image.width(), image.height()), false};

  const Image blended = alpha_blend(image, color, mask, alpha);
  Mask footprint = mask.dilated(blur_radius(blur_sigma));
  Image out = gaussian_blur(blended, blur_sigma, &footprint);
  return {std::move(out), std::move(footprint), false};
}

TestCaseSpec test_case_spec(TestCaseId id, RegionTestCaseMapping mapping) {
  const std::vector<Component> all(kApplicationOrder.begin(), kApplicationOrder.end());
  const std::vector<Component> eyes = {Component::Eyeshadow, Component::Eyeliner};
  const std::vector<Component> blush = {Component::Blush};
  const bool blush_first = mapping == RegionTestCaseMapping::BlushFirst;
  switch (id) {
    case TestCaseId::TC01: return {id, IntensityLevel::Adaptive, all, "Adaptive make-up"};
    case TestCaseId::TC02: return {id, IntensityLevel::Light, all, "Light make-up"};
    case TestCaseId::TC03: return {id, IntensityLevel::Medium, all, "Medium make-up"};
    case TestCaseId::TC04: return {id, IntensityLevel::Heavy, all, "Heavy make-up"};
    case TestCaseId::TC05:
      return blush_first ? TestCaseSpec{id, IntensityLevel::Light, blush, "Light blush"}
                    : TestCaseSpec{id, IntensityLevel::Light, eyes, "Light make-up on eyes"};
    case TestCaseId::TC06:
      return blush_first ? TestCaseSpec{id, IntensityLevel::Light, eyes, "Light make-up on eyes"}
                    : TestCaseSpec{id, IntensityLevel::Light, blush, "Light blush"};
    case TestCaseId::TC07: return {id, IntensityLevel::Light, {Component::Lipstick}, "Light lipstick"};
  }
  throw ParameterError("unknown test case");
}

PerturbResult apply_test_case(const Image& image, const LandmarkSet& landmarks, TestCaseId tc,
                              const StyleConfig& style) {
  const TestCaseSpec spec = test_case_spec(tc, style.mapping());
  PerturbResult result{image, Mask(image.width(), image.height()), {}, SkinTone::Medium, {}};
  result.sample = extract_adaptive_color(image, landmarks, style.geometry().sample_shrink);
  result.tone = classify_skin_tone(result.sample.mean_intensity, style.thresholds());

  for (const Component c : spec.components) {
    const ComponentStyle cs = resolve_component_style(c, spec.level, result.tone, &result.sample, style);
    auto applied = apply_component(result.image, landmarks, c, cs.color, cs.alpha, style.blur_sigma(),
                                   style.geometry());
    if (applied.skipped) {
      result.warnings.push_back(std::string(to_string(c)) + " skipped: degenerate region");
      continue;
    }
    result.image = std::move(applied.image);
    result.footprint |= applied.footprint;
  }
  return result;
}

}  // namespace facemt
