#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "facemt/mt_engine.hpp"

namespace facemt {

inline constexpr std::string_view kReportSchema = "facemt-report/1";

/// Everything needed to replay a run. Holds no timestamps or output paths so
/// that identical runs serialise identically.
struct RunManifest {
  std::string manifest_path;
  std::string manifest_sha256;
  std::string data_root;
  std::uint64_t seed = 42;
  std::string style_source;
  std::string style_version;
  std::string style_sha256;
  std::string region_mapping;
  VerdictConfig verdict;
  double max_failure_fraction = 0.20;
  EligibilityConfig eligibility;
  std::string endpoint;
  std::string landmarks;
  std::vector<std::string> mrs;
  std::size_t manifest_images = 0;
  std::size_t eligible_images = 0;
  std::vector<Exclusion> exclusions;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

struct RunReport {
  RunManifest run;
  PerGender<ConfusionMatrix> benchmark;  ///< baseline over every eligible image
  std::vector<MRResult> results;

  BiasReport benchmark_bias() const;
  Verdict overall() const;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Report JSON. Derived floats are rounded to two decimals; counts are kept
/// exact so a reload recomputes identical metrics.
std::string report_json(const RunReport& report);
/// Throws SchemaError for documents that do not follow the schema.
RunReport parse_report(std::string_view json_text);
RunReport load_report(const std::filesystem::path& path);

/// test_case,label,gender,accuracy,recall,precision,f1 with benchmark rows
/// first and male before female inside each test case.
std::string metrics_table_csv(const RunReport& report);
/// tc,gender,accuracy
std::string accuracy_chart_csv(const RunReport& report);
/// tc,bias_factor
std::string bias_chart_csv(const RunReport& report);

struct EmittedReport {
  std::filesystem::path report;
  std::filesystem::path metrics_table;
  std::filesystem::path chart_accuracy;
  std::filesystem::path chart_bias;
};

/// Writes report.json, metrics_table.csv, chart_accuracy.csv and
/// chart_bias.csv. Throws ParameterError for a report without results and
/// FilesystemError when `out_dir` cannot be written.
EmittedReport emit_report(const RunReport& report, const std::filesystem::path& out_dir);

/// Writes `content` to `path`, creating parent directories. Throws
/// FilesystemError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace facemt
