#include "facemt/gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "facemt/errors.hpp"
#include "json.hpp"

namespace facemt {

void ClassifierEndpoint::validate() const {
  if (timeout.count() <= 0) throw ParameterError("endpoint timeout must be positive");
  if (max_in_flight < 1) throw ParameterError("max_in_flight must be at least 1");
  if (max_retries < 0) throw ParameterError("max_retries must be non-negative");
  if (address.empty() && transport != Transport::InProcess) throw ParameterError("endpoint address is empty");
}

std::size_t BatchResult::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const PredictionRecord& r) { return !r.ok(); }));
}

BatchResult classify_batch(Classifier& classifier, std::span<const ClassifyItem> items, const BatchOptions& options) {
  BatchResult result;
  if (items.empty()) return result;
  const auto outcomes = classifier.score_all(items);
  if (outcomes.size() != items.size()) {
    throw ContractViolation(classifier.describe() + " returned " + std::to_string(outcomes.size()) +
                            " outcomes for " + std::to_string(items.size()) + " items");
  }
  result.records.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    const auto& out = outcomes[i];
    PredictionRecord rec;
    rec.image_path = item.path;
    rec.key = item.key;
    rec.ground_truth = item.ground_truth;
    rec.gender = item.gender;
    rec.test_case = options.test_case;
    if (out.score && std::isfinite(*out.score) && *out.score >= 0.0 && *out.score <= 1.0) {
      rec.score = out.score;
      rec.predicted = decide(*out.score, options.threshold);
    } else if (out.score) {
      rec.error = "score outside [0,1]: " + std::to_string(*out.score);
    } else {
      rec.error = out.error.empty() ? "no score" : out.error;
    }
    if (out.aborted && !result.aborted) {
      result.aborted = true;
      result.abort_reason = out.error;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::string request_document(std::uint64_t id, const ClassifyItem& item, bool inline_image) {
  nlohmann::json doc{{"id", id}};
  if (inline_image) {
    std::ifstream in(item.path, std::ios::binary);
    if (!in) throw ImageIoError(item.path, "cannot open for inline encoding");
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    doc["image"] = base64_encode(bytes);
  } else {
    doc["image"] = item.path;
  }
  return doc.dump();
}

std::optional<ParsedResponse> parse_response(std::string_view text) {
  const auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("id") || !doc["id"].is_number_unsigned()) {
    return std::nullopt;
  }
  ParsedResponse r;
  r.id = doc["id"].get<std::uint64_t>();
  if (doc.contains("score") && doc["score"].is_number()) {
    r.score = doc["score"].get<double>();
  } else if (doc.contains("error") && doc["error"].is_string()) {
    r.error = doc["error"].get<std::string>();
  } else {
    r.error = "response carries neither score nor error";
  }
  return r;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ParameterError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw ParameterError("invalid base64");
  std::size_t len = static_cast<std::size_t>(n);
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() > 1 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

std::unique_ptr<Classifier> classifier_from_spec(const std::string& spec, const std::filesystem::path& data_root,
                                                 const ClassifierEndpoint& defaults) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ParameterError("endpoint '" + spec + "' needs a cmd:, http: or stub: prefix");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "cmd" || kind == "http") {
    ClassifierEndpoint ep = defaults;
    ep.transport = kind == "cmd" ? Transport::SubprocessLines : Transport::Http;
    ep.address = rest;
    return connect(ep);
  }
  if (kind != "stub") throw ParameterError("unknown endpoint kind '" + kind + "'");

  const auto sep = rest.find(':');
  const std::string name = rest.substr(0, sep);
  const std::optional<std::string> param =
      sep == std::string::npos ? std::nullopt : std::optional<std::string>(rest.substr(sep + 1));
  auto number = [&](double fallback) {
    if (!param) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(*param, &used);
      if (used != param->size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ParameterError("stub parameter '" + *param + "' is not a number");
    }
  };
  if (name == "constant") return stub_constant(number(1.0));
  if (name == "threshold-mean") return stub_threshold_mean(number(128.0));
  if (name == "pixel-sensitive") return stub_pixel_sensitive(reference_from_directory(data_root));
  throw ParameterError("unknown stub '" + name + "'");
}

}  // namespace facemt
