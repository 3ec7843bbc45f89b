#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "facemt/errors.hpp"
#include "facemt/filters.hpp"
#include "facemt/makeup.hpp"
#include "json.hpp"
#include "synthetic_face.hpp"

using namespace facemt;
using nlohmann::json;

namespace {

json shipped_style() {
  std::ifstream in(std::string(FACEMT_SOURCE_DIR) + "/data/default_style.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return json::parse(ss.str());
}

LandmarkSet lm_from(std::vector<Point2> pts, int w = 256, int h = 256) {
  return LandmarkSet::validate(std::move(pts), LandmarkSource::PrecomputedFile, w, h, "face.png");
}

Mask brute_dilate(const Mask& m, int r) {
  Mask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.test(x, y))
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (xx >= 0 && yy >= 0 && xx < m.width() && yy < m.height()) out.set(xx, yy);
          }
  return out;
}

bool subset(const Mask& a, const Mask& b) {
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (a.test(x, y) && !b.test(x, y)) return false;
  return true;
}

StyleError parse_error(const json& doc) {
  try {
    StyleConfig::parse(doc.dump(), "test");
  } catch (const StyleError& e) {
    return e;
  }
  return StyleError("no error");
}

}  // namespace

TEST(StyleTest, DefaultsMatchShippedFile) {
  const auto style = StyleConfig::defaults();
  const json doc = shipped_style();
  EXPECT_EQ(style.version(), doc["version"].get<std::string>());
  EXPECT_DOUBLE_EQ(style.blur_sigma(), doc["blur_sigma"].get<double>());
  for (const auto& [key, cell] : doc["styles"].items()) {
    const auto first = key.find('.');
    const auto second = key.find('.', first + 1);
    const auto& s = style.cell(parse_component(key.substr(0, first)),
                               parse_level(key.substr(first + 1, second - first - 1)),
                               parse_tone(key.substr(second + 1)));
    EXPECT_EQ(s.color, (Rgb{cell["rgb"][0].get<std::uint8_t>(), cell["rgb"][1].get<std::uint8_t>(),
                            cell["rgb"][2].get<std::uint8_t>()}))
        << key;
    EXPECT_DOUBLE_EQ(s.alpha, cell["alpha"].get<double>()) << key;
  }
  EXPECT_EQ(doc["styles"].size(), 36u);
}

TEST(StyleTest, Sha256) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(StyleConfig::defaults().sha256(), sha256_hex(default_style_json()));
}

TEST(StyleTest, AlphaIsStrictlyMonotoneInLevel) {
  const auto style = StyleConfig::defaults();
  for (const auto c : kApplicationOrder) {
    for (const auto t : {SkinTone::Light, SkinTone::Medium, SkinTone::Deep}) {
      EXPECT_LT(style.cell(c, IntensityLevel::Light, t).alpha, style.cell(c, IntensityLevel::Medium, t).alpha);
      EXPECT_LT(style.cell(c, IntensityLevel::Medium, t).alpha, style.cell(c, IntensityLevel::Heavy, t).alpha);
    }
  }
}

TEST(StyleTest, RejectsInvalidFiles) {
  const json good = shipped_style();
  EXPECT_NO_THROW(StyleConfig::parse(good.dump(), "good"));

  json bad = good;
  bad["format"] = "other/1";
  EXPECT_NE(std::string(parse_error(bad).what()), "no error");

  bad = good;
  bad["styles"]["blush.heavy.deep"]["alpha"] = 0.01;
  EXPECT_NE(std::string(parse_error(bad).what()).find("blush"), std::string::npos);

  bad = good;
  bad["styles"].erase("lipstick.medium.light");
  EXPECT_NE(std::string(parse_error(bad).what()).find("lipstick.medium.light"), std::string::npos);

  bad = good;
  bad["styles"]["eyeliner.light.light"]["rgb"][0] = 300;
  EXPECT_NE(std::string(parse_error(bad).what()), "no error");

  bad = good;
  bad["region_test_cases"] = "table9";
  EXPECT_NE(std::string(parse_error(bad).what()), "no error");

  EXPECT_THROW(StyleConfig::parse("{", "x"), StyleError);
  EXPECT_THROW(StyleConfig::load_file("/nonexistent/style.json"), StyleError);
}

TEST(SkinToneTest, DefaultThresholds) {
  EXPECT_EQ(classify_skin_tone(200), SkinTone::Light);
  EXPECT_EQ(classify_skin_tone(170), SkinTone::Light);
  EXPECT_EQ(classify_skin_tone(100), SkinTone::Medium);
  EXPECT_EQ(classify_skin_tone(99.999), SkinTone::Deep);
  EXPECT_EQ(classify_skin_tone(50), SkinTone::Deep);
  EXPECT_THROW(classify_skin_tone(-1), ParameterError);
  EXPECT_THROW(classify_skin_tone(256), ParameterError);
}

TEST(AdaptiveSampleTest, RectangleBetweenTheBrows) {
  // Template: 21 = (115, 86), 22 = (141, 86), 27 = (128, 100). Shrinking 10%
  // per side gives x in [117.6, 138.4], y in [87.4, 98.6]; pixel centres
  // inside are columns 118..137 and rows 87..98.
  const auto lm = lm_from(testkit::template_landmarks());
  const PixelRect r = adaptive_sample_rect(lm, 256, 256, 0.10);
  EXPECT_EQ(r.x0, 118);
  EXPECT_EQ(r.x1, 138);
  EXPECT_EQ(r.y0, 87);
  EXPECT_EQ(r.y1, 99);
}

TEST(AdaptiveSampleTest, UniformAndHalfSplitImages) {
  const auto lm = lm_from(testkit::template_landmarks());
  const auto gray = extract_adaptive_color(Image(256, 256, Rgb{128, 128, 128}), lm);
  EXPECT_DOUBLE_EQ(gray.mean_intensity, 128.0);
  for (double v : gray.mean_rgb) EXPECT_DOUBLE_EQ(v, 128.0);

  // Columns 118..127 black, 128..137 white: ten of each per row.
  Image split(256, 256, Rgb{0, 0, 0});
  for (int y = 0; y < 256; ++y)
    for (int x = 128; x < 256; ++x) split.set(x, y, {255, 255, 255});
  const auto half = extract_adaptive_color(split, lm);
  for (double v : half.mean_rgb) EXPECT_DOUBLE_EQ(v, 127.5);
}

TEST(AdaptiveSampleTest, DegenerateRectangleFails) {
  auto pts = testkit::template_landmarks();
  pts[21] = pts[22] = pts[27] = {128, 90};
  EXPECT_THROW(extract_adaptive_color(Image(256, 256), lm_from(pts)), SampleFailedError);
}

TEST(ResolveStyleTest, TableLookupAndAdaptiveScaling) {
  const auto style = StyleConfig::defaults();
  const json doc = shipped_style();
  const auto cell = resolve_component_style(Component::Lipstick, IntensityLevel::Light, SkinTone::Medium, nullptr, style);
  const auto& expect = doc["styles"]["lipstick.light.medium"];
  EXPECT_DOUBLE_EQ(cell.alpha, expect["alpha"].get<double>());
  EXPECT_EQ(cell.color.r, expect["rgb"][0].get<int>());

  AdaptiveColorSample full;
  full.mean_rgb = {255, 255, 255};
  full.mean_intensity = 255;
  const auto adaptive = resolve_component_style(Component::Lipstick, IntensityLevel::Adaptive, SkinTone::Medium, &full, style);
  EXPECT_DOUBLE_EQ(adaptive.alpha, expect["alpha"].get<double>());

  AdaptiveColorSample dim = full;
  dim.mean_intensity = 51;
  const auto scaled = resolve_component_style(Component::Blush, IntensityLevel::Adaptive, SkinTone::Light, &dim, style);
  EXPECT_DOUBLE_EQ(scaled.alpha, style.cell(Component::Blush, IntensityLevel::Light, SkinTone::Light).alpha * 0.2);

  EXPECT_GT(style.cell(Component::Blush, IntensityLevel::Heavy, SkinTone::Deep).alpha,
            style.cell(Component::Blush, IntensityLevel::Light, SkinTone::Deep).alpha);
  EXPECT_THROW(resolve_component_style(Component::Blush, IntensityLevel::Adaptive, SkinTone::Light, nullptr, style),
               ParameterError);
}

TEST(ApplyComponentTest, ZeroAlphaIsBitExact) {
  const auto face = testkit::make_face(3);
  const auto lm = lm_from(face.landmarks);
  for (const auto c : kApplicationOrder) {
    const auto r = apply_component(face.image, lm, c, {255, 0, 0}, 0.0, 2.0);
    EXPECT_EQ(r.image, face.image) << to_string(c);
  }
}

TEST(ApplyComponentTest, LipstickIsLocal) {
  const auto face = testkit::make_face(1);
  const auto lm = lm_from(face.landmarks);
  const auto r = apply_component(face.image, lm, Component::Lipstick, {200, 20, 60}, 0.6, 2.0);
  const Mask lips = component_mask(Component::Lipstick, lm, 256, 256, {});
  const Mask changed = diff_mask(face.image, r.image);
  EXPECT_GT(changed.popcount(), 0u);
  EXPECT_TRUE(subset(changed, brute_dilate(lips, 6)));
}

TEST(ApplyComponentTest, RectangularLipsGetExactColour) {
  auto pts = testkit::template_landmarks();
  const std::vector<Point2> outer = {{100, 175}, {100, 160}, {114, 160}, {128, 160}, {142, 160}, {156, 160},
                                     {156, 175}, {156, 190}, {142, 190}, {128, 190}, {114, 190}, {100, 190}};
  const std::vector<Point2> inner = {{120, 175}, {120, 172}, {128, 172}, {136, 172},
                                     {136, 175}, {136, 178}, {128, 178}, {120, 178}};
  std::copy(outer.begin(), outer.end(), pts.begin() + 48);
  std::copy(inner.begin(), inner.end(), pts.begin() + 60);
  const Image base(256, 256, Rgb{90, 90, 90});
  const Rgb lipstick{180, 30, 60};
  const auto r = apply_component(base, lm_from(pts), Component::Lipstick, lipstick, 1.0, 0.0);
  for (int y = 0; y < 256; ++y) {
    for (int x = 0; x < 256; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const bool in_outer = cx > 100 && cx < 156 && cy > 160 && cy < 190;
      const bool in_inner = cx > 120 && cx < 136 && cy > 172 && cy < 178;
      ASSERT_EQ(r.image.at(x, y), (in_outer && !in_inner ? lipstick : Rgb{90, 90, 90})) << x << "," << y;
    }
  }
}

TEST(ApplyComponentTest, DegenerateRegionIsSkipped) {
  auto pts = testkit::template_landmarks();
  for (int i = 48; i < 68; ++i) pts[i] = {128, 175};
  const auto face = testkit::make_face(0);
  const auto r = apply_component(face.image, lm_from(pts), Component::Lipstick, {1, 2, 3}, 0.5, 2.0);
  EXPECT_TRUE(r.skipped);
  EXPECT_EQ(r.image, face.image);
}

TEST(TestCaseTest, SpecsFollowTheConfiguredMapping) {
  EXPECT_EQ(test_case_spec(TestCaseId::TC01).level, IntensityLevel::Adaptive);
  EXPECT_EQ(test_case_spec(TestCaseId::TC04).level, IntensityLevel::Heavy);
  EXPECT_EQ(test_case_spec(TestCaseId::TC04).components.size(), 4u);
  EXPECT_EQ(test_case_spec(TestCaseId::TC05).components, std::vector<Component>{Component::Blush});
  EXPECT_EQ(test_case_spec(TestCaseId::TC05).label, "Light blush");
  EXPECT_EQ(test_case_spec(TestCaseId::TC06).label, "Light make-up on eyes");
  EXPECT_EQ(test_case_spec(TestCaseId::TC05, RegionTestCaseMapping::EyesFirst).label, "Light make-up on eyes");
  EXPECT_EQ(test_case_spec(TestCaseId::TC06, RegionTestCaseMapping::EyesFirst).components,
            std::vector<Component>{Component::Blush});
  EXPECT_EQ(test_case_spec(TestCaseId::TC07).components, std::vector<Component>{Component::Lipstick});
  for (const auto tc : kAllTestCases) EXPECT_EQ(parse_test_case(to_string(tc)), tc);
  EXPECT_THROW(parse_test_case("TC08"), ParameterError);
}

TEST(TestCaseTest, ChangesStayInsideComponentFootprints) {
  const auto style = StyleConfig::defaults();
  const auto face = testkit::make_face(2);
  const auto lm = lm_from(face.landmarks);
  const int radius = blur_radius(style.blur_sigma());
  for (const auto tc : kAllTestCases) {
    const auto spec = test_case_spec(tc);
    Mask allowed(256, 256);
    for (const auto c : spec.components) allowed |= brute_dilate(component_mask(c, lm, 256, 256, style.geometry()), radius);
    const auto r = apply_test_case(face.image, lm, tc, style);
    const Mask changed = diff_mask(face.image, r.image);
    EXPECT_GT(changed.popcount(), 0u) << to_string(tc);
    EXPECT_TRUE(subset(changed, allowed)) << to_string(tc);
  }
}

TEST(TestCaseTest, AdaptiveOnUniformFace) {
  const auto style = StyleConfig::defaults();
  const Rgb skin{150, 120, 90};
  const Image img(256, 256, skin);
  const auto lm = lm_from(testkit::template_landmarks());
  const auto r = apply_test_case(img, lm, TestCaseId::TC01, style);
  EXPECT_DOUBLE_EQ(r.sample.mean_rgb[0], 150.0);
  EXPECT_DOUBLE_EQ(r.sample.mean_rgb[1], 120.0);
  EXPECT_DOUBLE_EQ(r.sample.mean_rgb[2], 90.0);
  EXPECT_DOUBLE_EQ(r.sample.mean_intensity, 120.0);
  EXPECT_EQ(r.tone, SkinTone::Medium);
  for (const auto c : kApplicationOrder) {
    const auto s = resolve_component_style(c, IntensityLevel::Adaptive, r.tone, &r.sample, style);
    EXPECT_DOUBLE_EQ(s.alpha, style.cell(c, IntensityLevel::Light, SkinTone::Medium).alpha * 120.0 / 255.0);
  }
}

TEST(TestCaseTest, Deterministic) {
  const auto style = StyleConfig::defaults();
  const auto face = testkit::make_face(4);
  const auto lm = lm_from(face.landmarks);
  EXPECT_EQ(apply_test_case(face.image, lm, TestCaseId::TC03, style).image,
            apply_test_case(face.image, lm, TestCaseId::TC03, style).image);
}
