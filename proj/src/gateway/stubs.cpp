#include <cmath>
#include <fmt/format.h>

#include "facemt/errors.hpp"
#include "facemt/gateway.hpp"
#include "facemt/png_io.hpp"

namespace facemt {

namespace {

// In-process classifiers decode each image themselves; items are scored in
// parallel and every exception turns into that item's error entry.
class ImageStub : public Classifier {
 public:
  std::vector<ScoreOutcome> score_all(std::span<const ClassifyItem> items) override {
    std::vector<ScoreOutcome> out(items.size());
    const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& item = items[static_cast<std::size_t>(i)];
      try {
        out[static_cast<std::size_t>(i)].score = score_one(item);
      } catch (const std::exception& e) {
        out[static_cast<std::size_t>(i)].error = e.what();
      }
    }
    return out;
  }

 protected:
  virtual double score_one(const ClassifyItem& item) const = 0;
};

class ConstantStub final : public ImageStub {
 public:
  explicit ConstantStub(double score) : score_(score) {}
  std::string describe() const override { return fmt::format("stub:constant:{}", score_); }

 protected:
  double score_one(const ClassifyItem&) const override { return score_; }

 private:
  double score_;
};

class ThresholdMeanStub final : public ImageStub {
 public:
  explicit ThresholdMeanStub(double t) : t_(t) {}
  std::string describe() const override { return fmt::format("stub:threshold-mean:{}", t_); }

 protected:
  double score_one(const ClassifyItem& item) const override {
    return mean_intensity(read_png(item.path)) >= t_ ? 1.0 : 0.0;
  }

 private:
  double t_;
};

class PixelSensitiveStub final : public ImageStub {
 public:
  explicit PixelSensitiveStub(ReferenceLookup ref) : ref_(std::move(ref)) {}
  std::string describe() const override { return "stub:pixel-sensitive"; }

 protected:
  double score_one(const ClassifyItem& item) const override {
    const auto reference = ref_(item.key);
    if (!reference) throw ParameterError("no reference image named '" + item.key + "'");
    return read_png(item.path) == *reference ? 1.0 : 0.0;
  }

 private:
  ReferenceLookup ref_;
};

}  // namespace

ReferenceLookup reference_from_directory(std::filesystem::path root) {
  return [root = std::move(root)](const std::string& key) -> std::optional<Image> {
    const auto path = root / key;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
    return read_png(path);
  };
}

ReferenceLookup reference_from_map(std::map<std::string, Image> images) {
  auto shared = std::make_shared<const std::map<std::string, Image>>(std::move(images));
  return [shared](const std::string& key) -> std::optional<Image> {
    const auto it = shared->find(key);
    if (it == shared->end()) return std::nullopt;
    return it->second;
  };
}

std::unique_ptr<Classifier> stub_constant(double score) {
  if (!(score >= 0.0 && score <= 1.0)) throw ParameterError("constant stub score must lie in [0,1]");
  return std::make_unique<ConstantStub>(score);
}

std::unique_ptr<Classifier> stub_threshold_mean(double t) {
  if (!std::isfinite(t)) throw ParameterError("threshold must be finite");
  return std::make_unique<ThresholdMeanStub>(t);
}

std::unique_ptr<Classifier> stub_pixel_sensitive(ReferenceLookup reference) {
  if (!reference) throw ParameterError("pixel-sensitive stub needs a reference corpus");
  return std::make_unique<PixelSensitiveStub>(std::move(reference));
}

}  // namespace facemt
