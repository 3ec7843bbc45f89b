#include "facemt/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "facemt/errors.hpp"

namespace facemt {

void ConfusionMatrix::add(Label truth, Label predicted) noexcept {
  if (truth == Label::Fake) {
    (predicted == Label::Fake ? tp : fn) += 1;
  } else {
    (predicted == Label::Fake ? fp : tn) += 1;
  }
}

ConfusionMatrix confusion(std::span<const PredictionRecord> records) {
  if (records.empty()) throw EmptyEvaluationError("confusion matrix over an empty record set");
  ConfusionMatrix cm;
  for (const auto& r : records) {
    if (!r.ok()) throw ContractViolation("error entry for " + r.image_path + " passed to confusion()");
    cm.add(r.ground_truth, r.predicted);
  }
  return cm;
}

std::optional<double> f1_score(std::optional<double> precision, std::optional<double> recall) {
  if (!precision || !recall) return std::nullopt;
  const double sum = *precision + *recall;
  if (sum == 0.0) return std::nullopt;
  return 2.0 * *precision * *recall / sum;
}

MetricSet metric_set(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyEvaluationError("metrics over an empty confusion matrix");
  auto pct = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den) * 100.0;
  };
  MetricSet m;
  m.accuracy = pct(cm.tp + cm.tn, cm.total());
  m.precision = pct(cm.tp, cm.tp + cm.fp);
  m.recall = pct(cm.tp, cm.tp + cm.fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

BiasReport bias_factor(double acc_male, double acc_female) {
  BiasReport b;
  b.acc_male = acc_male;
  b.acc_female = acc_female;
  b.bias_factor = std::abs(acc_female - acc_male);
  if (acc_female > acc_male) b.favored = Gender::Female;
  if (acc_male > acc_female) b.favored = Gender::Male;
  return b;
}

double round2(double x) {
  // The epsilon absorbs binary representation error so that decimal ties
  // such as 1.005 (stored as 1.00499999...) round up as written.
  const double scaled = std::floor(std::abs(x) * 100.0 + 0.5 + 1e-7);
  if (scaled == 0.0) return 0.0;
  return std::copysign(scaled / 100.0, x);
}

std::string format2(std::optional<double> x) {
  if (!x) return "undefined";
  return fmt::format("{:.2f}", round2(*x));
}

}  // namespace facemt
