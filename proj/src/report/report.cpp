#include "facemt/report.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "facemt/errors.hpp"
#include "json.hpp"

namespace facemt {

using nlohmann::json;

namespace {

constexpr std::array<Gender, 2> kGenders = {Gender::Male, Gender::Female};

json number2(std::optional<double> x) {
  if (!x) return nullptr;
  return round2(*x);
}

json confusion_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

json metrics_json(const MetricSet& m) {
  return {{"accuracy", number2(m.accuracy)},
          {"precision", number2(m.precision)},
          {"recall", number2(m.recall)},
          {"f1", number2(m.f1)}};
}

json corpus_json(const ConfusionMatrix& cm) {
  return {{"confusion", confusion_json(cm)}, {"metrics", metrics_json(metric_set(cm))}};
}

json bias_json(const BiasReport& b) {
  return {{"acc_male", round2(b.acc_male)},
          {"acc_female", round2(b.acc_female)},
          {"bias_factor", round2(b.bias_factor)},
          {"favored", b.favored ? json(to_string(*b.favored)) : json("none")}};
}

json gender_json(const GenderComparison& g) {
  return {{"paired", g.paired},
          {"flips", g.flips},
          {"flip_rate", round2(g.flip_rate())},
          {"affected", g.affected},
          {"affected_flips", g.affected_flips},
          {"affected_flip_rate", number2(g.affected_flip_rate())},
          {"accuracy_delta", round2(g.accuracy_delta())},
          {"baseline", corpus_json(g.baseline)},
          {"perturbed", corpus_json(g.perturbed)}};
}

json test_case_json(const TestCaseResult& tc) {
  json genders = json::object();
  for (const auto g : kGenders) genders[std::string(to_string(g))] = gender_json(tc.genders[static_cast<int>(g)]);
  return {{"id", to_string(tc.tc)},
          {"label", tc.label},
          {"verdict", to_string(tc.verdict)},
          {"reasons", tc.reasons},
          {"dropped", tc.dropped},
          {"bias", {{"baseline", bias_json(tc.bias_baseline())}, {"perturbed", bias_json(tc.bias_perturbed())}}},
          {"genders", genders}};
}

json mr_json(const MRResult& mr) {
  const auto& rel = relation(mr.mr);
  json parents = json::array();
  for (const auto p : rel.causal_parents) parents.push_back(to_string(p));
  json cases = json::array();
  for (const auto& tc : mr.test_cases) cases.push_back(test_case_json(tc));
  return {{"id", to_string(mr.mr)},
          {"description", rel.description},
          {"causal_parents", parents},
          {"verdict", to_string(mr.verdict)},
          {"test_cases", cases}};
}

json run_json(const RunManifest& r) {
  json exclusions = json::array();
  for (const auto& e : r.exclusions) {
    exclusions.push_back({{"image_path", e.image_path},
                          {"reason", e.reason},
                          {"detail", e.detail},
                          {"test_case", e.test_case ? json(to_string(*e.test_case)) : json(nullptr)}});
  }
  return {{"manifest", r.manifest_path},
          {"manifest_sha256", r.manifest_sha256},
          {"data_root", r.data_root},
          {"seed", r.seed},
          {"style", {{"source", r.style_source}, {"version", r.style_version}, {"sha256", r.style_sha256},
                     {"region_mapping", r.region_mapping}}},
          {"verdict_config", {{"max_accuracy_delta_pp", r.verdict.max_accuracy_delta_pp},
                              {"max_flip_rate", r.verdict.max_flip_rate},
                              {"threshold", r.verdict.threshold}}},
          {"max_failure_fraction", r.max_failure_fraction},
          {"eligibility", {{"max_asymmetry", r.eligibility.max_asymmetry},
                           {"min_inter_ocular_px", r.eligibility.min_inter_ocular_px}}},
          {"endpoint", r.endpoint},
          {"landmarks", r.landmarks},
          {"mrs", r.mrs},
          {"manifest_images", r.manifest_images},
          {"eligible_images", r.eligible_images},
          {"exclusions", exclusions}};
}

// --- reading ---------------------------------------------------------------

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("report: missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("report: field '") + key + "': " + e.what());
  }
}

ConfusionMatrix read_confusion(const json& j) {
  return {get<std::uint64_t>(j, "tp"), get<std::uint64_t>(j, "fp"), get<std::uint64_t>(j, "tn"),
          get<std::uint64_t>(j, "fn")};
}

template <typename Parse>
auto parse_field(const json& j, const char* key, Parse parse) {
  const auto s = get<std::string>(j, key);
  try {
    return parse(s);
  } catch (const Error& e) {
    throw SchemaError(std::string("report: field '") + key + "': " + e.what());
  }
}

TestCaseResult read_test_case(const json& j) {
  TestCaseResult tc;
  tc.tc = parse_field(j, "id", [](const std::string& s) { return parse_test_case(s); });
  tc.label = get<std::string>(j, "label");
  tc.verdict = parse_field(j, "verdict", [](const std::string& s) { return parse_verdict(s); });
  tc.reasons = get<std::vector<std::string>>(j, "reasons");
  tc.dropped = get<std::size_t>(j, "dropped");
  const auto& genders = field(j, "genders");
  for (const auto g : kGenders) {
    const auto& gj = field(genders, std::string(to_string(g)).c_str());
    auto& out = tc.genders[static_cast<int>(g)];
    out.paired = get<std::size_t>(gj, "paired");
    out.flips = get<std::size_t>(gj, "flips");
    out.affected = get<std::size_t>(gj, "affected");
    out.affected_flips = get<std::size_t>(gj, "affected_flips");
    out.baseline = read_confusion(field(field(gj, "baseline"), "confusion"));
    out.perturbed = read_confusion(field(field(gj, "perturbed"), "confusion"));
  }
  return tc;
}

MRResult read_mr(const json& j) {
  MRResult mr;
  mr.mr = parse_field(j, "id", [](const std::string& s) { return parse_mr(s); });
  mr.verdict = parse_field(j, "verdict", [](const std::string& s) { return parse_verdict(s); });
  const auto& cases = field(j, "test_cases");
  if (!cases.is_array()) throw SchemaError("report: test_cases is not an array");
  for (const auto& c : cases) mr.test_cases.push_back(read_test_case(c));
  return mr;
}

RunManifest read_run(const json& j) {
  RunManifest r;
  r.manifest_path = get<std::string>(j, "manifest");
  r.manifest_sha256 = get<std::string>(j, "manifest_sha256");
  r.data_root = get<std::string>(j, "data_root");
  r.seed = get<std::uint64_t>(j, "seed");
  const auto& style = field(j, "style");
  r.style_source = get<std::string>(style, "source");
  r.style_version = get<std::string>(style, "version");
  r.style_sha256 = get<std::string>(style, "sha256");
  r.region_mapping = get<std::string>(style, "region_mapping");
  const auto& vc = field(j, "verdict_config");
  r.verdict.max_accuracy_delta_pp = get<double>(vc, "max_accuracy_delta_pp");
  r.verdict.max_flip_rate = get<double>(vc, "max_flip_rate");
  r.verdict.threshold = get<double>(vc, "threshold");
  r.max_failure_fraction = get<double>(j, "max_failure_fraction");
  const auto& el = field(j, "eligibility");
  r.eligibility.max_asymmetry = get<double>(el, "max_asymmetry");
  r.eligibility.min_inter_ocular_px = get<double>(el, "min_inter_ocular_px");
  r.endpoint = get<std::string>(j, "endpoint");
  r.landmarks = get<std::string>(j, "landmarks");
  r.mrs = get<std::vector<std::string>>(j, "mrs");
  r.manifest_images = get<std::size_t>(j, "manifest_images");
  r.eligible_images = get<std::size_t>(j, "eligible_images");
  for (const auto& e : field(j, "exclusions")) {
    Exclusion x;
    x.image_path = get<std::string>(e, "image_path");
    x.reason = get<std::string>(e, "reason");
    x.detail = get<std::string>(e, "detail");
    const auto& tc = field(e, "test_case");
    if (!tc.is_null()) x.test_case = parse_field(e, "test_case", [](const std::string& s) { return parse_test_case(s); });
    r.exclusions.push_back(std::move(x));
  }
  return r;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void metric_rows(std::string& out, std::string_view tc, std::string_view label, Gender g, const MetricSet& m) {
  out += fmt::format("{},{},{},{},{},{},{}\n", tc, csv_field(label), to_string(g), format2(m.accuracy),
                     format2(m.recall), format2(m.precision), format2(m.f1));
}

}  // namespace

BiasReport RunReport::benchmark_bias() const {
  return bias_factor(*metric_set(benchmark[0]).accuracy, *metric_set(benchmark[1]).accuracy);
}

Verdict RunReport::overall() const {
  for (const auto& r : results) {
    if (r.verdict == Verdict::Violated) return Verdict::Violated;
  }
  return Verdict::Satisfied;
}

std::string report_json(const RunReport& report) {
  json mrs = json::array();
  for (const auto& r : report.results) mrs.push_back(mr_json(r));
  json doc = {{"schema", kReportSchema},
              {"run", run_json(report.run)},
              {"benchmark",
               {{"male", corpus_json(report.benchmark[0])},
                {"female", corpus_json(report.benchmark[1])},
                {"bias", bias_json(report.benchmark_bias())}}},
              {"overall_verdict", to_string(report.overall())},
              {"mrs", mrs}};
  return doc.dump(2) + "\n";
}

RunReport parse_report(std::string_view json_text) {
  const auto doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw SchemaError("report: not valid JSON");
  if (get<std::string>(doc, "schema") != kReportSchema) {
    throw SchemaError("report: unsupported schema '" + get<std::string>(doc, "schema") + "'");
  }
  RunReport r;
  r.run = read_run(field(doc, "run"));
  const auto& bench = field(doc, "benchmark");
  r.benchmark[0] = read_confusion(field(field(bench, "male"), "confusion"));
  r.benchmark[1] = read_confusion(field(field(bench, "female"), "confusion"));
  const auto& mrs = field(doc, "mrs");
  if (!mrs.is_array()) throw SchemaError("report: mrs is not an array");
  for (const auto& m : mrs) r.results.push_back(read_mr(m));
  return r;
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FilesystemError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str());
}

std::string metrics_table_csv(const RunReport& report) {
  std::string out = "test_case,label,gender,accuracy,recall,precision,f1\n";
  for (const auto g : kGenders) {
    metric_rows(out, "benchmark", "Original Sample (Benchmark)", g, metric_set(report.benchmark[static_cast<int>(g)]));
  }
  for (const auto& mr : report.results) {
    for (const auto& tc : mr.test_cases) {
      for (const auto g : kGenders) {
        metric_rows(out, to_string(tc.tc), tc.label, g, tc.genders[static_cast<int>(g)].perturbed_metrics());
      }
    }
  }
  return out;
}

std::string accuracy_chart_csv(const RunReport& report) {
  std::string out = "tc,gender,accuracy\n";
  for (const auto g : kGenders) {
    out += fmt::format("benchmark,{},{}\n", to_string(g), format2(metric_set(report.benchmark[static_cast<int>(g)]).accuracy));
  }
  for (const auto& mr : report.results) {
    for (const auto& tc : mr.test_cases) {
      for (const auto g : kGenders) {
        out += fmt::format("{},{},{}\n", to_string(tc.tc), to_string(g),
                           format2(tc.genders[static_cast<int>(g)].perturbed_metrics().accuracy));
      }
    }
  }
  return out;
}

std::string bias_chart_csv(const RunReport& report) {
  std::string out = "tc,bias_factor\n";
  out += fmt::format("benchmark,{}\n", format2(report.benchmark_bias().bias_factor));
  for (const auto& mr : report.results) {
    for (const auto& tc : mr.test_cases) {
      out += fmt::format("{},{}\n", to_string(tc.tc), format2(tc.bias_perturbed().bias_factor));
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw FilesystemError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FilesystemError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw FilesystemError("failed writing " + path.string());
}

EmittedReport emit_report(const RunReport& report, const std::filesystem::path& out_dir) {
  if (report.results.empty()) throw ParameterError("report has no MR results");
  EmittedReport files{out_dir / "report.json", out_dir / "metrics_table.csv", out_dir / "chart_accuracy.csv",
                      out_dir / "chart_bias.csv"};
  write_text_file(files.report, report_json(report));
  write_text_file(files.metrics_table, metrics_table_csv(report));
  write_text_file(files.chart_accuracy, accuracy_chart_csv(report));
  write_text_file(files.chart_bias, bias_chart_csv(report));
  return files;
}

}  // namespace facemt
