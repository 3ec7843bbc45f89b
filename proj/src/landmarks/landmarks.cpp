#include "facemt/landmarks.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "facemt/errors.hpp"
#include "facemt/subprocess.hpp"

namespace facemt {

namespace {

constexpr int kNoseTip = 30;

template <int First, int Last>
constexpr std::array<int, Last - First + 1> index_range() {
  std::array<int, Last - First + 1> out{};
  for (int i = 0; i < Last - First + 1; ++i) out[i] = First + i;
  return out;
}

constexpr auto kJaw = index_range<0, 16>();
constexpr auto kRightEyebrow = index_range<17, 21>();
constexpr auto kLeftEyebrow = index_range<22, 26>();
constexpr auto kNose = index_range<27, 35>();
constexpr auto kRightEye = index_range<36, 41>();
constexpr auto kLeftEye = index_range<42, 47>();
constexpr auto kOuterLip = index_range<48, 59>();
constexpr auto kInnerLip = index_range<60, 67>();

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

LandmarkSet LandmarkSet::validate(std::vector<Point2> points, LandmarkSource source, int width, int height,
                                  const std::string& image_path) {
  if (points.size() != kLandmarkCount) {
    throw LandmarkInvalidError(image_path, "expected 68 points, got " + std::to_string(points.size()));
  }
  std::size_t inside = 0;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw LandmarkInvalidError(image_path, "non-finite coordinate");
    if (p.x >= 0.0 && p.y >= 0.0 && p.x < width && p.y < height) ++inside;
  }
  if (2 * inside < points.size()) {
    throw LandmarkInvalidError(image_path, "only " + std::to_string(inside) + " of 68 points inside the image");
  }
  return LandmarkSet(std::move(points), source);
}

std::span<const int> region_indices(FaceRegion region) {
  switch (region) {
    case FaceRegion::Jaw: return kJaw;
    case FaceRegion::RightEyebrow: return kRightEyebrow;
    case FaceRegion::LeftEyebrow: return kLeftEyebrow;
    case FaceRegion::Nose: return kNose;
    case FaceRegion::RightEye: return kRightEye;
    case FaceRegion::LeftEye: return kLeftEye;
    case FaceRegion::OuterLip: return kOuterLip;
    case FaceRegion::InnerLip: return kInnerLip;
  }
  throw ParameterError("unknown face region");
}

std::string_view region_name(FaceRegion region) {
  switch (region) {
    case FaceRegion::Jaw: return "jaw";
    case FaceRegion::RightEyebrow: return "right-eyebrow";
    case FaceRegion::LeftEyebrow: return "left-eyebrow";
    case FaceRegion::Nose: return "nose";
    case FaceRegion::RightEye: return "right-eye";
    case FaceRegion::LeftEye: return "left-eye";
    case FaceRegion::OuterLip: return "outer-lip";
    case FaceRegion::InnerLip: return "inner-lip";
  }
  return "?";
}

FaceRegion parse_region(std::string_view name) {
  for (const auto r : kAllRegions) {
    if (region_name(r) == name) return r;
  }
  throw ParameterError("unknown face region '" + std::string(name) + "'");
}

std::vector<Point2> region_points(const LandmarkSet& landmarks, FaceRegion region) {
  std::vector<Point2> out;
  for (const int i : region_indices(region)) out.push_back(landmarks[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<Point2> region_points(const LandmarkSet& landmarks, std::string_view region) {
  return region_points(landmarks, parse_region(region));
}

Point2 centroid(std::span<const Point2> points) {
  Point2 c;
  for (const auto& p : points) {
    c.x += p.x;
    c.y += p.y;
  }
  const auto n = static_cast<double>(points.size());
  return {c.x / n, c.y / n};
}

Point2 eye_center_right(const LandmarkSet& landmarks) {
  return centroid(region_points(landmarks, FaceRegion::RightEye));
}

Point2 eye_center_left(const LandmarkSet& landmarks) {
  return centroid(region_points(landmarks, FaceRegion::LeftEye));
}

double inter_ocular_distance(const LandmarkSet& landmarks) {
  return distance(eye_center_left(landmarks), eye_center_right(landmarks));
}

std::optional<LandmarkSet> parse_landmark_document(std::string_view text, LandmarkSource source, int width,
                                                   int height, const std::string& image_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LandmarkInvalidError(image_path, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("faces") || !doc["faces"].is_array()) {
    throw LandmarkInvalidError(image_path, "document lacks a 'faces' array");
  }
  const auto& faces = doc["faces"];
  if (faces.empty()) return std::nullopt;
  const auto& face = faces.front();
  if (!face.is_object() || !face.contains("points") || !face["points"].is_array()) {
    throw LandmarkInvalidError(image_path, "face entry lacks a 'points' array");
  }
  std::vector<Point2> points;
  for (const auto& p : face["points"]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw LandmarkInvalidError(image_path, "point is not an [x, y] number pair");
    }
    points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return LandmarkSet::validate(std::move(points), source, width, height, image_path);
}

std::string landmark_document(const std::string& image, const std::vector<Point2>& points) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({p.x, p.y});
  nlohmann::json faces = nlohmann::json::array();
  if (!points.empty()) faces.push_back({{"points", pts}});
  return nlohmann::json{{"image", image}, {"faces", faces}}.dump();
}

LandmarkSet load_landmark_file(const std::filesystem::path& path, const Image& image,
                               const std::string& image_path) {
  const std::string label = image_path.empty() ? path.string() : image_path;
  std::ifstream in(path);
  if (!in) throw LandmarkInvalidError(label, "cannot open landmark file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto set = parse_landmark_document(ss.str(), LandmarkSource::PrecomputedFile, image.width(), image.height(), label);
  if (!set) throw DetectorError(DetectorError::Kind::NoFace, "no face in " + label);
  return std::move(*set);
}

LandmarkSet detect_landmarks_external(const std::filesystem::path& image_path, const DetectorConfig& config,
                                      int width, int height) {
  if (config.command.empty()) throw ParameterError("no landmark detector command configured");
  const std::string label = image_path.string();
  auto proc = Subprocess::spawn(shell_command(config.command, {label}), Subprocess::StderrMode::Capture);
  proc.close_stdin();
  const auto deadline = Subprocess::Clock::now() + config.timeout;
  std::string out;
  std::string err;
  if (!proc.read_to_end(out, err, deadline)) {
    proc.kill();
    throw DetectorError(DetectorError::Kind::Timeout, "landmark detector timed out on " + label, err);
  }
  const auto code = proc.wait(deadline);
  if (!code) {
    proc.kill();
    throw DetectorError(DetectorError::Kind::Timeout, "landmark detector timed out on " + label, err);
  }
  if (*code != 0) {
    throw DetectorError(DetectorError::Kind::ProcessFailure,
                        "landmark detector exited with " + std::to_string(*code) + " on " + label + ": " + err,
                        err);
  }
  std::optional<LandmarkSet> set;
  try {
    set = parse_landmark_document(out, LandmarkSource::ExternalDetector, width, height, label);
  } catch (const LandmarkInvalidError& e) {
    throw DetectorError(DetectorError::Kind::BadOutput, e.what(), err);
  }
  if (!set) throw DetectorError(DetectorError::Kind::NoFace, "no face in " + label);
  return std::move(*set);
}

std::string_view to_string(Ineligibility reason) {
  switch (reason) {
    case Ineligibility::None: return "eligible";
    case Ineligibility::NoFace: return "no-face";
    case Ineligibility::NonFrontal: return "non-frontal";
    case Ineligibility::TooSmall: return "too-small";
  }
  return "?";
}

double asymmetry_ratio(const LandmarkSet& landmarks) {
  const Point2 nose = landmarks[kNoseTip];
  const double iod = inter_ocular_distance(landmarks);
  const double diff = std::abs(distance(eye_center_left(landmarks), nose) - distance(eye_center_right(landmarks), nose));
  return iod > 0.0 ? diff / iod : std::numeric_limits<double>::infinity();
}

EligibilityVerdict eligibility_filter(const std::optional<LandmarkSet>& landmarks, const EligibilityConfig& config) {
  EligibilityVerdict v;
  if (!landmarks) {
    v.reason = Ineligibility::NoFace;
    return v;
  }
  v.inter_ocular = inter_ocular_distance(*landmarks);
  v.asymmetry = asymmetry_ratio(*landmarks);
  if (v.asymmetry > config.max_asymmetry) {
    v.reason = Ineligibility::NonFrontal;
  } else if (v.inter_ocular < config.min_inter_ocular_px) {
    v.reason = Ineligibility::TooSmall;
  } else {
    v.eligible = true;
  }
  return v;
}

}  // namespace facemt
