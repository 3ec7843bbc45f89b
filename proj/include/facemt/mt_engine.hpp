#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facemt/dataset.hpp"
#include "facemt/gateway.hpp"
#include "facemt/landmarks.hpp"
#include "facemt/makeup.hpp"
#include "facemt/metrics.hpp"

namespace facemt {

enum class MrId { MR01, MR02, MR03 };

struct MetamorphicRelation {
  MrId id;
  std::string description;
  std::vector<MrId> causal_parents;
  std::vector<TestCaseId> test_cases;
};

std::string_view to_string(MrId id);
/// Throws ParameterError for unknown ids.
MrId parse_mr(std::string_view s);
const MetamorphicRelation& relation(MrId id);

struct SuiteEntry {
  MrId mr;
  TestCaseId tc;
  friend bool operator==(const SuiteEntry&, const SuiteEntry&) = default;
};

/// Expands MRs to their test cases in table order, dropping repeats.
std::vector<SuiteEntry> build_suite(std::span<const MrId> mrs);
std::vector<SuiteEntry> build_suite(std::span<const std::string> mr_ids);

struct VerdictConfig {
  double max_accuracy_delta_pp = 1.0;
  double max_flip_rate = 0.02;
  double threshold = 0.5;

  /// Throws ParameterError for negative or non-finite limits.
  void validate() const;
  friend bool operator==(const VerdictConfig&, const VerdictConfig&) = default;
};

enum class Verdict { Satisfied, Violated };
std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view s);

struct VerdictOutcome {
  Verdict verdict = Verdict::Satisfied;
  std::vector<std::string> reasons;
};

/// Index by static_cast<int>(Gender).
template <typename T>
using PerGender = std::array<T, 2>;

/// Violated iff, for either gender, |perturbed - baseline accuracy| exceeds
/// the accuracy limit or the flip rate exceeds the flip limit. Every tripped
/// condition is listed in `reasons`.
VerdictOutcome verdict(const PerGender<MetricSet>& baseline, const PerGender<MetricSet>& perturbed,
                       const PerGender<double>& flip_rates, const VerdictConfig& config);

struct GenderComparison {
  ConfusionMatrix baseline;
  ConfusionMatrix perturbed;
  std::size_t paired = 0;
  std::size_t flips = 0;
  std::size_t affected = 0;        ///< images whose pixels the test case changed
  std::size_t affected_flips = 0;  ///< flips among affected images

  MetricSet baseline_metrics() const { return metric_set(baseline); }
  MetricSet perturbed_metrics() const { return metric_set(perturbed); }
  double flip_rate() const;
  std::optional<double> affected_flip_rate() const;
  /// Perturbed minus baseline accuracy, in percentage points.
  double accuracy_delta() const;

  friend bool operator==(const GenderComparison&, const GenderComparison&) = default;
};

struct TestCaseResult {
  TestCaseId tc = TestCaseId::TC01;
  std::string label;
  PerGender<GenderComparison> genders;
  std::size_t dropped = 0;  ///< pairs removed because either side was an error entry
  Verdict verdict = Verdict::Satisfied;
  std::vector<std::string> reasons;

  BiasReport bias_baseline() const;
  BiasReport bias_perturbed() const;
  friend bool operator==(const TestCaseResult&, const TestCaseResult&) = default;
};

struct MRResult {
  MrId mr = MrId::MR01;
  std::vector<TestCaseResult> test_cases;
  Verdict verdict = Verdict::Satisfied;  ///< violated iff any test case is

  friend bool operator==(const MRResult&, const MRResult&) = default;
};

/// Pairs baseline and perturbed predictions by key and evaluates the verdict.
/// Pairs with an error entry on either side are dropped from both corpora.
/// Throws PairingError when the key sets differ and EmptyEvaluationError when
/// a gender has no usable pair.
TestCaseResult compare_paired(TestCaseId tc, std::string label, std::span<const PredictionRecord> baseline,
                              std::span<const PredictionRecord> perturbed, const std::set<std::string>& affected,
                              const VerdictConfig& config);

// --- runner -----------------------------------------------------------------

struct LandmarkMode {
  enum class Kind { Files, Detector };
  Kind kind = Kind::Files;
  DetectorConfig detector;

  /// "files" or "detector:<command>".
  static LandmarkMode parse(std::string_view spec);
  std::string describe() const;
};

struct Exclusion {
  std::string image_path;
  std::string reason;  ///< no-landmarks, no-face, non-frontal, too-small, ...
  std::string detail;
  std::optional<TestCaseId> test_case;  ///< nullopt when excluded from every test case

  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct RunOptions {
  std::filesystem::path data_root;
  std::filesystem::path work_dir;  ///< perturbed corpora go to work_dir/TCxx/
  LandmarkMode landmarks;
  EligibilityConfig eligibility;
  VerdictConfig verdict;
  double max_failure_fraction = 0.20;
  int jobs = 0;  ///< 0 = OpenMP default
};

struct PerturbedImage {
  std::size_t index;  ///< into the eligible corpus
  std::filesystem::path output;
  bool changed = false;
};

struct PerturbedCorpus {
  TestCaseId tc;
  std::vector<PerturbedImage> images;
  std::vector<Exclusion> exclusions;
};

/// Orchestrates one evaluation run over a test manifest. The corpus is
/// prepared once and the baseline classified once; each test case then
/// perturbs and classifies the same eligible image set.
class MtRunner {
 public:
  MtRunner(Manifest test, const StyleConfig& style, RunOptions options);

  /// Loads images and landmarks and applies the eligibility filter.
  /// Idempotent.
  void prepare();

  struct EligibleImage {
    SampleRecord record;
    std::filesystem::path source;
    LandmarkSet landmarks;
  };
  const std::vector<EligibleImage>& eligible();
  /// Corpus-level exclusions followed by per-test-case ones, in order of
  /// discovery.
  const std::vector<Exclusion>& exclusions() const noexcept { return exclusions_; }
  std::size_t manifest_size() const noexcept { return manifest_.records.size(); }

  /// Writes the perturbed corpus to work_dir/TCxx/<image_path>.
  PerturbedCorpus perturb(TestCaseId tc);

  /// Classifies the eligible originals once; later calls return the cache.
  /// Throws RunAbortedError when the transport gave up or more than
  /// max_failure_fraction of the images failed.
  const std::vector<PredictionRecord>& baseline(Classifier& classifier);

  TestCaseResult run_test_case(TestCaseId tc, Classifier& classifier);
  MRResult run(MrId mr, Classifier& classifier);

 private:
  void check_failures(const BatchResult& batch, std::string_view corpus) const;

  Manifest manifest_;
  const StyleConfig& style_;
  RunOptions options_;
  bool prepared_ = false;
  std::vector<EligibleImage> eligible_;
  std::vector<Exclusion> exclusions_;
  std::optional<std::vector<PredictionRecord>> baseline_;
};

/// Single-MR convenience wrapper around MtRunner.
MRResult run_mr(MrId mr, const Manifest& test, Classifier& classifier, const StyleConfig& style,
                const RunOptions& options);

}  // namespace facemt
