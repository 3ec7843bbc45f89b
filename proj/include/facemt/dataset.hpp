#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace facemt {

enum class Label { Fake, Real };
enum class Gender { Male, Female };

std::string_view to_string(Label l);
std::string_view to_string(Gender g);
std::optional<Label> parse_label(std::string_view s);
std::optional<Gender> parse_gender(std::string_view s);

struct SampleRecord {
  std::string image_path;
  Label label = Label::Fake;
  Gender gender = Gender::Male;
  std::string landmark_path;  ///< empty when none

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Manifest {
  std::vector<SampleRecord> records;
  std::string provenance;

  std::size_t count(Gender g, Label l) const;
  std::size_t count(Gender g) const;
};

struct SplitSet {
  Manifest train;
  Manifest validation;
  Manifest test;
  std::uint64_t seed = 0;
};

struct SplitOptions {
  int train_parts = 3;  ///< train:test ratio numerator
  int test_parts = 2;
  double validation_fraction = 0.10;
};

/// Parses the `image_path,label,gender,landmark_path` CSV. Throws SchemaError
/// naming the offending line, DuplicateError for repeated paths.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::string_view csv_text, std::string provenance);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
std::string format_manifest(const Manifest& manifest);

/// Seeded uniform downsampling so that, within each label, male and female
/// counts match. Kept records retain their original order. Throws
/// BalanceImpossibleError when a gender is absent.
Manifest balance_by_gender(const Manifest& manifest, std::uint64_t seed);

/// Stratified (gender x label) split: each stratum of n records gives
/// round_half_up(n * train/(train+test)) to the training pool and the rest to
/// test; round_half_up(pool * validation_fraction) of the pool then moves to
/// validation. Strata smaller than 5 go wholly to train (reported through
/// `warnings`). Deterministic for a fixed seed.
SplitSet split(const Manifest& manifest, std::uint64_t seed, const SplitOptions& options = {},
               std::vector<std::string>* warnings = nullptr);

/// floor(x + 0.5) for non-negative x, robust to representation error.
long long round_half_up(double x);

}  // namespace facemt
