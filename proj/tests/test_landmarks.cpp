#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "facemt/errors.hpp"
#include "facemt/landmarks.hpp"
#include "facemt/subprocess.hpp"
#include "synthetic_face.hpp"

using namespace facemt;
namespace fs = std::filesystem;

namespace {

LandmarkSet template_set() {
  return LandmarkSet::validate(testkit::template_landmarks(), LandmarkSource::PrecomputedFile, 256, 256, "t.png");
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("facemt_lm_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST(LandmarkSetTest, ValidatesCountFinitenessAndBounds) {
  auto pts = testkit::template_landmarks();
  EXPECT_EQ(template_set().points().size(), 68u);

  auto short_pts = pts;
  short_pts.pop_back();
  EXPECT_THROW(LandmarkSet::validate(short_pts, LandmarkSource::PrecomputedFile, 256, 256, "a"),
               LandmarkInvalidError);

  auto nan_pts = pts;
  nan_pts[5].x = std::nan("");
  EXPECT_THROW(LandmarkSet::validate(nan_pts, LandmarkSource::PrecomputedFile, 256, 256, "a"), LandmarkInvalidError);

  std::vector<Point2> far(68, Point2{-1000, -1000});
  try {
    LandmarkSet::validate(far, LandmarkSource::PrecomputedFile, 256, 256, "img/far.png");
    FAIL();
  } catch (const LandmarkInvalidError& e) {
    EXPECT_EQ(e.image_path(), "img/far.png");
  }
}

TEST(RegionTest, FixedIndexTables) {
  const auto lm = template_set();
  const auto outer = region_points(lm, "outer-lip");
  ASSERT_EQ(outer.size(), 12u);
  EXPECT_EQ(outer.front(), lm[48]);
  EXPECT_EQ(outer.back(), lm[59]);
  const auto eye = region_points(lm, FaceRegion::RightEye);
  ASSERT_EQ(eye.size(), 6u);
  EXPECT_EQ(eye.front(), lm[36]);
  EXPECT_THROW(region_points(lm, "chin"), ParameterError);

  std::size_t total = 0;
  for (const auto r : kAllRegions) {
    total += region_indices(r).size();
    EXPECT_EQ(parse_region(region_name(r)), r);
  }
  EXPECT_EQ(total, 68u);
}

TEST(RegionTest, EyeCentresAndInterOcularDistance) {
  const auto lm = template_set();
  const Point2 r = eye_center_right(lm);
  EXPECT_NEAR(r.x, 96.0, 1e-9);
  EXPECT_NEAR(r.y, 646.0 / 6.0, 1e-9);
  EXPECT_NEAR(inter_ocular_distance(lm), 64.0, 1e-9);
}

TEST(LandmarkDocumentTest, RoundTripsAndDetectsNoFace) {
  const auto pts = testkit::template_landmarks();
  const auto doc = landmark_document("x.png", pts);
  const auto set = parse_landmark_document(doc, LandmarkSource::PrecomputedFile, 256, 256, "x.png");
  ASSERT_TRUE(set.has_value());
  EXPECT_EQ(set->points(), pts);
  EXPECT_FALSE(parse_landmark_document(R"({"faces":[]})", LandmarkSource::PrecomputedFile, 256, 256, "x"));
  EXPECT_THROW(parse_landmark_document("{not json", LandmarkSource::PrecomputedFile, 256, 256, "x"),
               LandmarkInvalidError);
  EXPECT_THROW(parse_landmark_document(R"({"faces":[{"points":[[1,2]]}]})", LandmarkSource::PrecomputedFile, 256,
                                       256, "x"),
               LandmarkInvalidError);
}

TEST(LandmarkFileTest, LoadsAndReportsErrors) {
  TempDir dir;
  const Image img(256, 256);
  auto pts = testkit::template_landmarks();
  const auto ok = write(dir.path() / "ok.json", landmark_document("a.png", pts));
  EXPECT_EQ(load_landmark_file(ok, img).points().size(), 68u);

  pts.pop_back();
  const auto short_file = write(dir.path() / "short.json", landmark_document("a.png", pts));
  EXPECT_THROW(load_landmark_file(short_file, img), LandmarkInvalidError);

  const auto none = write(dir.path() / "none.json", R"({"image":"a.png","faces":[]})");
  try {
    load_landmark_file(none, img);
    FAIL();
  } catch (const DetectorError& e) {
    EXPECT_EQ(e.kind(), DetectorError::Kind::NoFace);
  }
  EXPECT_THROW(load_landmark_file(dir.path() / "missing.json", img), LandmarkInvalidError);
}

TEST(DetectorTest, ParsesValidOutput) {
  TempDir dir;
  const auto doc = write(dir.path() / "doc.json", landmark_document("a.png", testkit::template_landmarks()));
  DetectorConfig cfg{"f() { cat '" + doc + "'; }; f", std::chrono::seconds(10)};
  const auto set = detect_landmarks_external(dir.path() / "a.png", cfg, 256, 256);
  EXPECT_EQ(set.source(), LandmarkSource::ExternalDetector);
  EXPECT_EQ(set.points().size(), 68u);
}

TEST(DetectorTest, ReceivesImagePathAsArgument) {
  TempDir dir;
  const auto doc = write(dir.path() / "doc.json", landmark_document("a.png", testkit::template_landmarks()));
  DetectorConfig cfg{"f() { test \"$1\" = '/some dir/a b.png' && cat '" + doc + "'; }; f", std::chrono::seconds(10)};
  EXPECT_NO_THROW(detect_landmarks_external("/some dir/a b.png", cfg, 256, 256));
}

TEST(DetectorTest, DistinguishesFailureKinds) {
  auto kind_of = [](const std::string& cmd, std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    try {
      detect_landmarks_external("x.png", DetectorConfig{cmd, timeout}, 256, 256);
    } catch (const DetectorError& e) {
      return std::make_pair(e.kind(), e.stderr_text());
    }
    return std::make_pair(DetectorError::Kind::BadOutput, std::string("no error"));
  };
  EXPECT_EQ(kind_of(R"(f() { echo '{"faces":[]}'; }; f)").first, DetectorError::Kind::NoFace);
  const auto failure = kind_of("f() { echo 'model missing' >&2; exit 3; }; f");
  EXPECT_EQ(failure.first, DetectorError::Kind::ProcessFailure);
  EXPECT_NE(failure.second.find("model missing"), std::string::npos);
  EXPECT_EQ(kind_of("f() { echo garbage; }; f").first, DetectorError::Kind::BadOutput);
  EXPECT_EQ(kind_of("f() { sleep 5; }; f", std::chrono::milliseconds(200)).first, DetectorError::Kind::Timeout);
}

TEST(EligibilityTest, SymmetricFaceIsEligible) {
  const auto v = eligibility_filter(template_set());
  EXPECT_TRUE(v.eligible);
  EXPECT_EQ(v.reason, Ineligibility::None);
  EXPECT_NEAR(v.asymmetry, 0.0, 1e-12);
}

TEST(EligibilityTest, NoFace) {
  const auto v = eligibility_filter(std::nullopt);
  EXPECT_FALSE(v.eligible);
  EXPECT_EQ(v.reason, Ineligibility::NoFace);
  EXPECT_EQ(to_string(v.reason), "no-face");
}

TEST(EligibilityTest, ProfilePoseIsNonFrontal) {
  // Eye centres sit at x = 96 and x = 160 on the same row, 64 px apart. A nose
  // tip on that row at x = 96 + a gives |(64 - a) - a| / 64; a = 6.4 -> 0.8.
  auto pts = testkit::template_landmarks();
  pts[30] = {96.0 + 6.4, 646.0 / 6.0};
  const auto lm = LandmarkSet::validate(pts, LandmarkSource::PrecomputedFile, 256, 256, "p.png");
  EXPECT_NEAR(asymmetry_ratio(lm), 0.8, 1e-9);
  const auto v = eligibility_filter(lm);
  EXPECT_FALSE(v.eligible);
  EXPECT_EQ(v.reason, Ineligibility::NonFrontal);
}

TEST(EligibilityTest, TinyFaceIsTooSmall) {
  auto pts = testkit::template_landmarks();
  for (auto& p : pts) p = {p.x * 0.3, p.y * 0.3};
  const auto lm = LandmarkSet::validate(pts, LandmarkSource::PrecomputedFile, 256, 256, "s.png");
  EXPECT_EQ(eligibility_filter(lm).reason, Ineligibility::TooSmall);
}

TEST(SubprocessTest, LineExchangeAndExitCode) {
  auto p = Subprocess::spawn({"/bin/sh", "-c", "read x; echo got:$x; exit 5"}, Subprocess::StderrMode::Discard);
  ASSERT_TRUE(p.write_all("hello\n"));
  std::string line;
  const auto deadline = Subprocess::Clock::now() + std::chrono::seconds(10);
  ASSERT_EQ(p.read_line(line, deadline), Subprocess::ReadStatus::Line);
  EXPECT_EQ(line, "got:hello");
  EXPECT_EQ(p.read_line(line, deadline), Subprocess::ReadStatus::Eof);
  EXPECT_EQ(p.wait(deadline), 5);
}

TEST(SubprocessTest, ReadLineTimesOut) {
  auto p = Subprocess::spawn({"/bin/sh", "-c", "sleep 5"}, Subprocess::StderrMode::Discard);
  std::string line;
  EXPECT_EQ(p.read_line(line, Subprocess::Clock::now() + std::chrono::milliseconds(100)),
            Subprocess::ReadStatus::Timeout);
  p.kill();
}

TEST(SubprocessTest, MissingProgramThrows) {
  EXPECT_THROW(Subprocess::spawn({"/nonexistent/program"}, Subprocess::StderrMode::Discard), TransportError);
}
