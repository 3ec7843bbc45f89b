#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facemt/image.hpp"

namespace facemt {

inline constexpr std::size_t kLandmarkCount = 68;

enum class LandmarkSource { PrecomputedFile, ExternalDetector };

/// 68 facial landmarks in the iBUG 300-W ordering. Only constructible through
/// validate(), so every instance satisfies the count/finite/in-bounds checks.
class LandmarkSet {
 public:
  /// Throws LandmarkInvalidError (carrying `image_path`) when the points are
  /// not exactly 68, contain a non-finite value, or fewer than half of them
  /// lie inside a width x height image.
  static LandmarkSet validate(std::vector<Point2> points, LandmarkSource source, int width, int height,
                              const std::string& image_path);

  const std::vector<Point2>& points() const noexcept { return points_; }
  const Point2& operator[](std::size_t i) const { return points_.at(i); }
  LandmarkSource source() const noexcept { return source_; }

 private:
  LandmarkSet(std::vector<Point2> points, LandmarkSource source)
      : points_(std::move(points)), source_(source) {}

  std::vector<Point2> points_;
  LandmarkSource source_;
};

enum class FaceRegion { Jaw, RightEyebrow, LeftEyebrow, Nose, RightEye, LeftEye, OuterLip, InnerLip };

inline constexpr std::array<FaceRegion, 8> kAllRegions = {
    FaceRegion::Jaw,     FaceRegion::RightEyebrow, FaceRegion::LeftEyebrow, FaceRegion::Nose,
    FaceRegion::RightEye, FaceRegion::LeftEye,     FaceRegion::OuterLip,    FaceRegion::InnerLip};

std::span<const int> region_indices(FaceRegion region);
std::string_view region_name(FaceRegion region);
/// Accepts the hyphenated names ("right-eye", "outer-lip", ...). Unknown
/// names throw ParameterError.
FaceRegion parse_region(std::string_view name);

std::vector<Point2> region_points(const LandmarkSet& landmarks, FaceRegion region);
std::vector<Point2> region_points(const LandmarkSet& landmarks, std::string_view region);

Point2 centroid(std::span<const Point2> points);
Point2 eye_center_right(const LandmarkSet& landmarks);
Point2 eye_center_left(const LandmarkSet& landmarks);
double inter_ocular_distance(const LandmarkSet& landmarks);

// --- landmark documents ----------------------------------------------------

/// Parses one `{"image": ..., "faces": [{"points": [[x,y] x 68]}]}` document.
/// Returns nullopt for an empty `faces` array (no face). Malformed JSON or
/// schema violations throw LandmarkInvalidError.
std::optional<LandmarkSet> parse_landmark_document(std::string_view text, LandmarkSource source,
                                                   int width, int height, const std::string& image_path);

std::string landmark_document(const std::string& image, const std::vector<Point2>& points);

/// Reads a precomputed landmark file. A no-face document throws
/// DetectorError(NoFace); invalid contents throw LandmarkInvalidError.
LandmarkSet load_landmark_file(const std::filesystem::path& path, const Image& image,
                               const std::string& image_path = {});

struct DetectorConfig {
  std::string command;  ///< shell command template; image path appended as last argument
  std::chrono::milliseconds timeout{30'000};
};

/// Runs the external detector and parses its single output document.
/// Errors are DetectorError with kind NoFace, ProcessFailure (stderr
/// captured), Timeout or BadOutput.
LandmarkSet detect_landmarks_external(const std::filesystem::path& image_path, const DetectorConfig& config,
                                      int width, int height);

// --- eligibility -------------------------------------------------------------

struct EligibilityConfig {
  double max_asymmetry = 0.35;
  double min_inter_ocular_px = 24.0;

  friend bool operator==(const EligibilityConfig&, const EligibilityConfig&) = default;
};

enum class Ineligibility { None, NoFace, NonFrontal, TooSmall };

struct EligibilityVerdict {
  bool eligible = false;
  Ineligibility reason = Ineligibility::None;
  double asymmetry = 0.0;
  double inter_ocular = 0.0;
};

std::string_view to_string(Ineligibility reason);

/// |d(left eye, nose tip) - d(right eye, nose tip)| / inter-ocular distance.
double asymmetry_ratio(const LandmarkSet& landmarks);

/// A missing landmark set means no face was detected.
EligibilityVerdict eligibility_filter(const std::optional<LandmarkSet>& landmarks,
                                      const EligibilityConfig& config = {});

}  // namespace facemt
