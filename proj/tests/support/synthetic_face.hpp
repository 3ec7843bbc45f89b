#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "facemt/dataset.hpp"
#include "facemt/image.hpp"

namespace facemt::testkit {

struct SyntheticFace {
  Image image;
  std::vector<Point2> landmarks;  ///< 68 points, iBUG ordering
};

/// Deterministic cartoon face on a 256x256 canvas. `variant` picks skin tone,
/// scale, offset and texture noise.
SyntheticFace make_face(int variant, int size = 256);

/// 68 template landmarks for a 256x256 face, before any variant transform.
std::vector<Point2> template_landmarks();

struct FixtureOptions {
  int count = 10;
  bool add_unlabelled = false;  ///< one extra record without a landmark file
};

/// Writes images/face_NN.png, landmarks/face_NN.json and manifest.csv under
/// `dir`. Genders alternate in pairs, labels alternate. Returns the manifest.
Manifest write_fixture_set(const std::filesystem::path& dir, const FixtureOptions& options = {});

}  // namespace facemt::testkit
