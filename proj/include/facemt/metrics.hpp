#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "facemt/dataset.hpp"
#include "facemt/makeup.hpp"

namespace facemt {

/// One classifier verdict. `score` is the probability that the image is
/// real; records without a score are error entries.
struct PredictionRecord {
  std::string image_path;
  std::string key;  ///< corpus-relative name, stable across baseline and perturbed copies
  std::optional<double> score;
  Label predicted = Label::Fake;
  Label ground_truth = Label::Fake;
  Gender gender = Gender::Male;
  std::optional<TestCaseId> test_case;  ///< nullopt = baseline
  std::string error;

  bool ok() const noexcept { return score.has_value(); }
};

inline Label decide(double score, double threshold) { return score >= threshold ? Label::Real : Label::Fake; }

/// Fake is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  void add(Label truth, Label predicted) noexcept;

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend ConfusionMatrix operator+(ConfusionMatrix a, const ConfusionMatrix& b) noexcept { return a += b; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Percentages; nullopt where a denominator is zero.
struct MetricSet {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

struct BiasReport {
  double acc_male = 0.0;
  double acc_female = 0.0;
  double bias_factor = 0.0;
  std::optional<Gender> favored;  ///< nullopt when both accuracies are equal
};

/// Throws EmptyEvaluationError for no records and ContractViolation if any
/// record is an error entry.
ConfusionMatrix confusion(std::span<const PredictionRecord> records);

/// Throws EmptyEvaluationError when the matrix is empty.
MetricSet metric_set(const ConfusionMatrix& cm);

/// Harmonic mean of two percentages; undefined when either input is
/// undefined or both are zero.
std::optional<double> f1_score(std::optional<double> precision, std::optional<double> recall);

BiasReport bias_factor(double acc_male, double acc_female);

/// Two-decimal rounding, half away from zero on the decimal value.
double round2(double x);
/// Two-decimal rendering; "undefined" for nullopt.
std::string format2(std::optional<double> x);

}  // namespace facemt
