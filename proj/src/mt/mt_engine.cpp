#include "facemt/mt_engine.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "facemt/errors.hpp"
#include "facemt/png_io.hpp"

namespace facemt {

namespace {

const std::array<MetamorphicRelation, 3>& relations() {
  static const std::array<MetamorphicRelation, 3> table = {{
      {MrId::MR01, "Introduction of make-up in testing images should not change the decisions made by the model.",
       {}, {TestCaseId::TC01}},
      {MrId::MR02,
       "Introduction of different intensity of make-up, including light, medium and heavy, should not change the "
       "decision made by the model.",
       {MrId::MR01}, {TestCaseId::TC02, TestCaseId::TC03, TestCaseId::TC04}},
      {MrId::MR03,
       "Introduction of make-up with light intensity on the different facial regions should not change the decision "
       "made by the model.",
       {MrId::MR01, MrId::MR02}, {TestCaseId::TC05, TestCaseId::TC06, TestCaseId::TC07}},
  }};
  return table;
}

int gender_index(Gender g) { return static_cast<int>(g); }

int thread_count(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

std::filesystem::path output_path(const std::filesystem::path& work_dir, TestCaseId tc, const std::string& rel) {
  auto p = work_dir / std::string(to_string(tc)) / rel;
  if (p.extension() != ".png") p += ".png";
  return p;
}

}  // namespace

std::string_view to_string(MrId id) {
  switch (id) {
    case MrId::MR01: return "MR01";
    case MrId::MR02: return "MR02";
    case MrId::MR03: return "MR03";
  }
  return "?";
}

MrId parse_mr(std::string_view s) {
  for (const auto& r : relations()) {
    if (to_string(r.id) == s) return r.id;
  }
  throw ParameterError("unknown metamorphic relation '" + std::string(s) + "'");
}

const MetamorphicRelation& relation(MrId id) { return relations()[static_cast<std::size_t>(id)]; }

std::vector<SuiteEntry> build_suite(std::span<const MrId> mrs) {
  std::vector<SuiteEntry> suite;
  for (const auto mr : mrs) {
    for (const auto tc : relation(mr).test_cases) {
      const SuiteEntry e{mr, tc};
      if (std::find(suite.begin(), suite.end(), e) == suite.end()) suite.push_back(e);
    }
  }
  return suite;
}

std::vector<SuiteEntry> build_suite(std::span<const std::string> mr_ids) {
  std::vector<MrId> ids;
  ids.reserve(mr_ids.size());
  for (const auto& s : mr_ids) ids.push_back(parse_mr(s));
  return build_suite(ids);
}

void VerdictConfig::validate() const {
  if (!std::isfinite(max_accuracy_delta_pp) || max_accuracy_delta_pp < 0.0) {
    throw ParameterError("max accuracy delta must be a nonnegative number");
  }
  if (!std::isfinite(max_flip_rate) || max_flip_rate < 0.0) {
    throw ParameterError("max flip rate must be a nonnegative number");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ParameterError("decision threshold must lie in [0,1]");
}

std::string_view to_string(Verdict v) { return v == Verdict::Satisfied ? "satisfied" : "violated"; }

Verdict parse_verdict(std::string_view s) {
  if (s == "satisfied") return Verdict::Satisfied;
  if (s == "violated") return Verdict::Violated;
  throw ParameterError("unknown verdict '" + std::string(s) + "'");
}

VerdictOutcome verdict(const PerGender<MetricSet>& baseline, const PerGender<MetricSet>& perturbed,
                       const PerGender<double>& flip_rates, const VerdictConfig& config) {
  VerdictOutcome out;
  for (const auto g : {Gender::Male, Gender::Female}) {
    const int i = gender_index(g);
    if (!baseline[i].accuracy || !perturbed[i].accuracy) {
      throw ContractViolation(fmt::format("{} accuracy is undefined", to_string(g)));
    }
    const double delta = *perturbed[i].accuracy - *baseline[i].accuracy;
    if (std::abs(delta) > config.max_accuracy_delta_pp) {
      out.reasons.push_back(fmt::format("{} accuracy delta {:+.2f} pp exceeds {:.2f} pp ({:.2f} -> {:.2f})",
                                        to_string(g), delta, config.max_accuracy_delta_pp, *baseline[i].accuracy,
                                        *perturbed[i].accuracy));
    }
  }
  for (const auto g : {Gender::Male, Gender::Female}) {
    const double rate = flip_rates[gender_index(g)];
    if (rate > config.max_flip_rate) {
      out.reasons.push_back(
          fmt::format("{} flip rate {:.4f} exceeds {:.4f}", to_string(g), rate, config.max_flip_rate));
    }
  }
  out.verdict = out.reasons.empty() ? Verdict::Satisfied : Verdict::Violated;
  return out;
}

double GenderComparison::flip_rate() const {
  return paired == 0 ? 0.0 : static_cast<double>(flips) / static_cast<double>(paired);
}

std::optional<double> GenderComparison::affected_flip_rate() const {
  if (affected == 0) return std::nullopt;
  return static_cast<double>(affected_flips) / static_cast<double>(affected);
}

double GenderComparison::accuracy_delta() const {
  return *perturbed_metrics().accuracy - *baseline_metrics().accuracy;
}

BiasReport TestCaseResult::bias_baseline() const {
  return bias_factor(*genders[0].baseline_metrics().accuracy, *genders[1].baseline_metrics().accuracy);
}

BiasReport TestCaseResult::bias_perturbed() const {
  return bias_factor(*genders[0].perturbed_metrics().accuracy, *genders[1].perturbed_metrics().accuracy);
}

TestCaseResult compare_paired(TestCaseId tc, std::string label, std::span<const PredictionRecord> baseline,
                              std::span<const PredictionRecord> perturbed, const std::set<std::string>& affected,
                              const VerdictConfig& config) {
  std::map<std::string_view, const PredictionRecord*> by_key;
  for (const auto& r : baseline) {
    if (!by_key.emplace(r.key, &r).second) throw PairingError("baseline lists " + r.key + " twice");
  }
  if (baseline.size() != perturbed.size()) {
    throw PairingError(fmt::format("{}: baseline has {} images, perturbed corpus {}", to_string(tc), baseline.size(),
                                   perturbed.size()));
  }

  TestCaseResult result;
  result.tc = tc;
  result.label = std::move(label);
  for (const auto& p : perturbed) {
    const auto it = by_key.find(p.key);
    if (it == by_key.end()) throw PairingError(fmt::format("{}: {} has no baseline", to_string(tc), p.key));
    const PredictionRecord& b = *it->second;
    by_key.erase(it);
    if (b.gender != p.gender || b.ground_truth != p.ground_truth) {
      throw PairingError(fmt::format("{}: metadata of {} differs between corpora", to_string(tc), p.key));
    }
    if (!b.ok() || !p.ok()) {
      ++result.dropped;
      continue;
    }
    auto& g = result.genders[gender_index(b.gender)];
    g.baseline.add(b.ground_truth, b.predicted);
    g.perturbed.add(p.ground_truth, p.predicted);
    ++g.paired;
    const bool flipped = b.predicted != p.predicted;
    if (flipped) ++g.flips;
    if (affected.count(p.key) != 0) {
      ++g.affected;
      if (flipped) ++g.affected_flips;
    }
  }

  for (const auto gender : {Gender::Male, Gender::Female}) {
    if (result.genders[gender_index(gender)].paired == 0) {
      throw EmptyEvaluationError(fmt::format("{}: no usable {} pairs", to_string(tc), to_string(gender)));
    }
  }
  const auto& m = result.genders[0];
  const auto& f = result.genders[1];
  const auto outcome = verdict({m.baseline_metrics(), f.baseline_metrics()},
                               {m.perturbed_metrics(), f.perturbed_metrics()}, {m.flip_rate(), f.flip_rate()}, config);
  result.verdict = outcome.verdict;
  result.reasons = outcome.reasons;
  return result;
}

LandmarkMode LandmarkMode::parse(std::string_view spec) {
  LandmarkMode mode;
  if (spec == "files") return mode;
  constexpr std::string_view prefix = "detector:";
  if (spec.substr(0, prefix.size()) == prefix && spec.size() > prefix.size()) {
    mode.kind = Kind::Detector;
    mode.detector.command = std::string(spec.substr(prefix.size()));
    return mode;
  }
  throw ParameterError("landmark mode must be 'files' or 'detector:<command>', got '" + std::string(spec) + "'");
}

std::string LandmarkMode::describe() const {
  return kind == Kind::Files ? "files" : "detector:" + detector.command;
}

MtRunner::MtRunner(Manifest test, const StyleConfig& style, RunOptions options)
    : manifest_(std::move(test)), style_(style), options_(std::move(options)) {
  options_.verdict.validate();
  if (!(options_.max_failure_fraction >= 0.0 && options_.max_failure_fraction <= 1.0)) {
    throw ParameterError("failure fraction must lie in [0,1]");
  }
}

void MtRunner::prepare() {
  if (prepared_) return;
  const auto n = manifest_.records.size();
  std::vector<std::optional<EligibleImage>> ok(n);
  std::vector<std::optional<Exclusion>> bad(n);

  const int threads = thread_count(options_.jobs);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const auto& rec = manifest_.records[i];
    const auto source = options_.data_root / rec.image_path;
    auto exclude = [&](std::string reason, std::string detail) {
      bad[i] = Exclusion{rec.image_path, std::move(reason), std::move(detail), std::nullopt};
    };
    try {
      const Image image = read_png(source);
      std::optional<LandmarkSet> landmarks;
      if (options_.landmarks.kind == LandmarkMode::Kind::Files) {
        if (rec.landmark_path.empty()) {
          exclude("no-landmarks", "no landmark file and no detector");
          continue;
        }
        landmarks = load_landmark_file(options_.data_root / rec.landmark_path, image, rec.image_path);
      } else {
        landmarks = detect_landmarks_external(source, options_.landmarks.detector, image.width(), image.height());
      }
      const auto v = eligibility_filter(landmarks, options_.eligibility);
      if (!v.eligible) {
        exclude(std::string(to_string(v.reason)),
                fmt::format("asymmetry {:.3f}, inter-ocular {:.1f} px", v.asymmetry, v.inter_ocular));
        continue;
      }
      extract_adaptive_color(image, *landmarks, style_.geometry().sample_shrink);
      ok[i] = EligibleImage{rec, source, std::move(*landmarks)};
    } catch (const DetectorError& e) {
      exclude(e.kind() == DetectorError::Kind::NoFace ? "no-face" : "detector-error", e.what());
    } catch (const LandmarkInvalidError& e) {
      exclude("invalid-landmarks", e.what());
    } catch (const SampleFailedError& e) {
      exclude("sample-failed", e.what());
    } catch (const ImageIoError& e) {
      exclude("unreadable-image", e.what());
    } catch (const Error& e) {
      exclude("error", e.what());
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i]) eligible_.push_back(std::move(*ok[i]));
    if (bad[i]) exclusions_.push_back(std::move(*bad[i]));
  }
  prepared_ = true;
}

const std::vector<MtRunner::EligibleImage>& MtRunner::eligible() {
  prepare();
  return eligible_;
}

PerturbedCorpus MtRunner::perturb(TestCaseId tc) {
  prepare();
  const auto n = eligible_.size();
  std::vector<std::optional<PerturbedImage>> done(n);
  std::vector<std::optional<Exclusion>> failed(n);

  const int threads = thread_count(options_.jobs);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const auto& e = eligible_[i];
    try {
      const Image original = read_png(e.source);
      const auto result = apply_test_case(original, e.landmarks, tc, style_);
      const auto out = output_path(options_.work_dir, tc, e.record.image_path);
      write_png(out, result.image);
      done[i] = PerturbedImage{i, out, !(result.image == original)};
    } catch (const Error& err) {
      failed[i] = Exclusion{e.record.image_path, "perturb-failed", err.what(), tc};
    }
  }

  PerturbedCorpus corpus{tc, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) corpus.images.push_back(std::move(*done[i]));
    if (failed[i]) corpus.exclusions.push_back(std::move(*failed[i]));
  }
  return corpus;
}

void MtRunner::check_failures(const BatchResult& batch, std::string_view corpus) const {
  if (batch.aborted) throw RunAbortedError(fmt::format("{} corpus: {}", corpus, batch.abort_reason));
  const auto errors = batch.error_count();
  if (static_cast<double>(errors) > options_.max_failure_fraction * static_cast<double>(batch.records.size())) {
    std::string first;
    for (const auto& r : batch.records) {
      if (!r.ok()) {
        first = r.image_path + ": " + r.error;
        break;
      }
    }
    throw RunAbortedError(fmt::format("{} corpus: {} of {} classifications failed (first: {})", corpus, errors,
                                      batch.records.size(), first));
  }
}

const std::vector<PredictionRecord>& MtRunner::baseline(Classifier& classifier) {
  prepare();
  if (baseline_) return *baseline_;
  std::vector<ClassifyItem> items;
  items.reserve(eligible_.size());
  for (const auto& e : eligible_) {
    items.push_back({e.source.string(), e.record.image_path, e.record.label, e.record.gender});
  }
  auto batch = classify_batch(classifier, items, {options_.verdict.threshold, std::nullopt});
  check_failures(batch, "baseline");
  baseline_ = std::move(batch.records);
  return *baseline_;
}

TestCaseResult MtRunner::run_test_case(TestCaseId tc, Classifier& classifier) {
  const auto& base = baseline(classifier);
  auto corpus = perturb(tc);
  exclusions_.insert(exclusions_.end(), corpus.exclusions.begin(), corpus.exclusions.end());

  std::vector<ClassifyItem> items;
  std::vector<PredictionRecord> paired_base;
  std::set<std::string> affected;
  items.reserve(corpus.images.size());
  paired_base.reserve(corpus.images.size());
  for (const auto& img : corpus.images) {
    const auto& e = eligible_[img.index];
    items.push_back({img.output.string(), e.record.image_path, e.record.label, e.record.gender});
    paired_base.push_back(base[img.index]);
    if (img.changed) affected.insert(e.record.image_path);
  }
  auto batch = classify_batch(classifier, items, {options_.verdict.threshold, tc});
  check_failures(batch, to_string(tc));
  return compare_paired(tc, test_case_spec(tc, style_.mapping()).label, paired_base, batch.records, affected,
                        options_.verdict);
}

MRResult MtRunner::run(MrId mr, Classifier& classifier) {
  MRResult result;
  result.mr = mr;
  for (const auto tc : relation(mr).test_cases) {
    result.test_cases.push_back(run_test_case(tc, classifier));
    if (result.test_cases.back().verdict == Verdict::Violated) result.verdict = Verdict::Violated;
  }
  return result;
}

MRResult run_mr(MrId mr, const Manifest& test, Classifier& classifier, const StyleConfig& style,
                const RunOptions& options) {
  MtRunner runner(test, style, options);
  return runner.run(mr, classifier);
}

}  // namespace facemt
