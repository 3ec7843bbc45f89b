#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facemt/image.hpp"
#include "facemt/metrics.hpp"

namespace facemt {

inline constexpr std::string_view kProtocolVersion = "facemt/1";

enum class Transport { SubprocessLines, Http, InProcess };

struct ClassifierEndpoint {
  Transport transport = Transport::SubprocessLines;
  std::string address;  ///< command template or base URL
  std::chrono::milliseconds timeout{30'000};
  int max_in_flight = 4;
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  bool inline_images = false;  ///< send base64 PNG instead of a path

  /// Throws ParameterError when timeout <= 0 or max_in_flight < 1.
  void validate() const;
};

struct ClassifyItem {
  std::string path;  ///< file the classifier reads
  std::string key;   ///< corpus-relative name
  Label ground_truth = Label::Fake;
  Gender gender = Gender::Male;
};

struct ScoreOutcome {
  std::optional<double> score;
  std::string error;
  bool aborted = false;
};

/// A classifier-under-test. Implementations return exactly one outcome per
/// item, in item order.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string describe() const = 0;
  virtual std::vector<ScoreOutcome> score_all(std::span<const ClassifyItem> items) = 0;
};

struct BatchOptions {
  double threshold = 0.5;
  std::optional<TestCaseId> test_case;
};

struct BatchResult {
  std::vector<PredictionRecord> records;
  bool aborted = false;
  std::string abort_reason;

  std::size_t error_count() const;
};

/// One record per item, order preserved. Scores outside [0,1] become error
/// entries. A transport that gives up marks the batch aborted and flags the
/// unfinished records.
BatchResult classify_batch(Classifier& classifier, std::span<const ClassifyItem> items,
                           const BatchOptions& options = {});

// --- built-in stubs ----------------------------------------------------------

/// Looks up the reference image for a corpus key; nullopt when unknown.
using ReferenceLookup = std::function<std::optional<Image>(const std::string& key)>;

ReferenceLookup reference_from_directory(std::filesystem::path root);
ReferenceLookup reference_from_map(std::map<std::string, Image> images);

/// Always returns `score`.
std::unique_ptr<Classifier> stub_constant(double score);
/// 1 when the image's mean channel value is >= t, else 0.
std::unique_ptr<Classifier> stub_threshold_mean(double t);
/// 1 for images bit-identical to the reference of the same key, else 0.
std::unique_ptr<Classifier> stub_pixel_sensitive(ReferenceLookup reference);

// --- remote transports -------------------------------------------------------

/// Connects lazily on first use. Throws ParameterError for invalid endpoints.
std::unique_ptr<Classifier> connect(const ClassifierEndpoint& endpoint);

/// Request document for one image: {"id": n, "image": "<path or base64>"}.
std::string request_document(std::uint64_t id, const ClassifyItem& item, bool inline_image);

/// Parses a response line. Returns the id and either a score or an error.
struct ParsedResponse {
  std::uint64_t id = 0;
  std::optional<double> score;
  std::string error;
};
std::optional<ParsedResponse> parse_response(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Parses `cmd:<template>`, `http:<url>` or `stub:<name>[:<param>]`.
/// Stub names: constant[:score], threshold-mean[:t], pixel-sensitive
/// (reference images read from `data_root`).
std::unique_ptr<Classifier> classifier_from_spec(const std::string& spec, const std::filesystem::path& data_root,
                                                 const ClassifierEndpoint& defaults);

}  // namespace facemt
