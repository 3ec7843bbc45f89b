#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "facemt/image.hpp"
#include "facemt/landmarks.hpp"

namespace facemt {

enum class Component { Eyeliner, Eyeshadow, Blush, Lipstick };
enum class IntensityLevel { Adaptive, Light, Medium, Heavy };
enum class SkinTone { Light, Medium, Deep };
enum class TestCaseId { TC01, TC02, TC03, TC04, TC05, TC06, TC07 };

/// Which of TC05/TC06 carries blush and which carries the eye components.
/// BlushFirst (the default): TC05 = light blush, TC06 = light eyes.
enum class RegionTestCaseMapping { BlushFirst, EyesFirst };

inline constexpr std::array<Component, 4> kApplicationOrder = {Component::Eyeshadow, Component::Eyeliner,
                                                               Component::Blush, Component::Lipstick};
inline constexpr std::array<TestCaseId, 7> kAllTestCases = {TestCaseId::TC01, TestCaseId::TC02, TestCaseId::TC03,
                                                            TestCaseId::TC04, TestCaseId::TC05, TestCaseId::TC06,
                                                            TestCaseId::TC07};

std::string_view to_string(Component c);
std::string_view to_string(IntensityLevel l);
std::string_view to_string(SkinTone t);
std::string_view to_string(TestCaseId tc);
Component parse_component(std::string_view s);
IntensityLevel parse_level(std::string_view s);
SkinTone parse_tone(std::string_view s);
TestCaseId parse_test_case(std::string_view s);

struct ComponentStyle {
  Rgb color;
  double alpha = 0.0;

  friend bool operator==(const ComponentStyle&, const ComponentStyle&) = default;
};

struct MakeupGeometry {
  double eyeliner_extrusion = 0.06;  ///< fraction of inter-ocular distance
  double blush_radius = 0.18;        ///< fraction of inter-ocular distance
  double blush_aspect = 0.8;         ///< vertical / horizontal radius
  double sample_shrink = 0.10;       ///< per side, adaptive sample rectangle
  int samples_per_segment = 8;
};

struct SkinToneThresholds {
  double light_min = 170.0;
  double medium_min = 100.0;
};

/// Style file contents: per (component, level, tone) colour and alpha plus
/// the geometry and blur constants. Loaded once, then read-only.
class StyleConfig {
 public:
  static StyleConfig defaults();
  static StyleConfig load_file(const std::filesystem::path& path);
  /// Throws StyleError on any schema or monotonicity violation.
  static StyleConfig parse(std::string_view json_text, std::string source);

  const ComponentStyle& cell(Component c, IntensityLevel level, SkinTone tone) const;

  const std::string& version() const noexcept { return version_; }
  const std::string& sha256() const noexcept { return sha256_; }
  const std::string& source() const noexcept { return source_; }
  const MakeupGeometry& geometry() const noexcept { return geometry_; }
  const SkinToneThresholds& thresholds() const noexcept { return thresholds_; }
  double blur_sigma() const noexcept { return blur_sigma_; }
  double adaptive_tint() const noexcept { return adaptive_tint_; }
  RegionTestCaseMapping mapping() const noexcept { return mapping_; }

  void set_blur_sigma(double sigma);
  void set_mapping(RegionTestCaseMapping m) noexcept { mapping_ = m; }

 private:
  StyleConfig() = default;

  std::string version_;
  std::string sha256_;
  std::string source_;
  MakeupGeometry geometry_;
  SkinToneThresholds thresholds_;
  double blur_sigma_ = 2.0;
  double adaptive_tint_ = 0.25;
  RegionTestCaseMapping mapping_ = RegionTestCaseMapping::BlushFirst;
  std::map<std::string, ComponentStyle> cells_;
};

/// The style file shipped with the tool, byte for byte.
std::string_view default_style_json();

std::string sha256_hex(std::string_view bytes);

// --- adaptive colour ---------------------------------------------------------

struct AdaptiveColorSample {
  std::array<double, 3> mean_rgb{};
  double mean_intensity = 0.0;
};

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  ///< half-open
  int area() const noexcept { return (x1 - x0) * (y1 - y0); }
};

/// Skin patch between the eyebrows: points 21..22 horizontally, eyebrow line
/// down to the nose bridge (27) vertically, shrunk by `shrink` per side.
PixelRect adaptive_sample_rect(const LandmarkSet& landmarks, int width, int height, double shrink);

/// Throws SampleFailedError when the rectangle has fewer than 4 pixels.
AdaptiveColorSample extract_adaptive_color(const Image& image, const LandmarkSet& landmarks,
                                           double shrink = 0.10);

/// Throws ParameterError when intensity lies outside [0,255].
SkinTone classify_skin_tone(double intensity, const SkinToneThresholds& thresholds = {});

/// Style lookup. The adaptive level uses the light-level cell, scales its
/// alpha by intensity/255 and tints its colour toward the sampled skin mean.
ComponentStyle resolve_component_style(Component component, IntensityLevel level, SkinTone tone,
                                       const AdaptiveColorSample* sample, const StyleConfig& style);

// --- application -------------------------------------------------------------

/// Closed control polygons (before interpolation) making up a component.
/// Lipstick returns the outer lip first, then the inner lip to subtract.
std::vector<std::vector<Point2>> component_polygons(Component component, const LandmarkSet& landmarks,
                                                    const MakeupGeometry& geometry);

/// Rasterised component region on a width x height canvas.
Mask component_mask(Component component, const LandmarkSet& landmarks, int width, int height,
                    const MakeupGeometry& geometry);

struct ComponentResult {
  Image image;
  Mask footprint;  ///< mask dilated by the blur radius: superset of changed pixels
  bool skipped = false;
};

/// Blend `color` at `alpha` into the component region, then blur the result
/// inside the region dilated by the blur radius. An empty region is skipped
/// and the input returned unchanged.
ComponentResult apply_component(const Image& image, const LandmarkSet& landmarks, Component component, Rgb color,
                                 double alpha, double blur_sigma, const MakeupGeometry& geometry = {});

struct TestCaseSpec {
  TestCaseId id;
  IntensityLevel level;
  std::vector<Component> components;  ///< in application order
  std::string label;
};

TestCaseSpec test_case_spec(TestCaseId id, RegionTestCaseMapping mapping = RegionTestCaseMapping::BlushFirst);

struct PerturbResult {
  Image image;
  Mask footprint;
  AdaptiveColorSample sample;
  SkinTone tone = SkinTone::Medium;
  std::vector<std::string> warnings;
};

/// Applies a test case's components in fixed order. Deterministic for fixed
/// inputs. Propagates SampleFailedError from the skin sample.
PerturbResult apply_test_case(const Image& image, const LandmarkSet& landmarks, TestCaseId tc,
                              const StyleConfig& style);

}  // namespace facemt
