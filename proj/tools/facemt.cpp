// facemt: metamorphic testing of face-forgery classifiers under makeup.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <sstream>
#include <fstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "facemt/dataset.hpp"
#include "facemt/errors.hpp"
#include "facemt/gateway.hpp"
#include "facemt/makeup.hpp"
#include "facemt/mt_engine.hpp"
#include "facemt/report.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace facemt;

namespace {

constexpr int kExitSatisfied = 0;
constexpr int kExitViolated = 1;
constexpr int kExitFailure = 2;

struct CommonArgs {
  std::string manifest;
  std::string data_root;
  std::string landmarks = "files";
  std::string style;
  int jobs = 0;
  std::string out;
};

fs::path resolve_data_root(const CommonArgs& a) {
  if (!a.data_root.empty()) return a.data_root;
  const auto parent = fs::path(a.manifest).parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

Manifest require_manifest(const std::string& path) {
  if (!fs::is_regular_file(path)) throw FilesystemError("manifest not found: " + path);
  return load_manifest(path);
}

StyleConfig resolve_style(const std::string& flag) {
  if (!flag.empty()) return StyleConfig::load_file(flag);
  if (const char* env = std::getenv("FACEMT_STYLE"); env != nullptr && *env != '\0') {
    return StyleConfig::load_file(env);
  }
  return StyleConfig::defaults();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string exclusion_csv(const std::vector<Exclusion>& exclusions) {
  std::string out = "image_path,test_case,reason,detail\n";
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (const char c : s) {
      if (c == '"') q += '"';
      q += c == '\n' ? ' ' : c;
    }
    return q + "\"";
  };
  for (const auto& e : exclusions) {
    out += fmt::format("{},{},{},{}\n", quote(e.image_path), e.test_case ? to_string(*e.test_case) : "all",
                       e.reason, quote(e.detail));
  }
  return out;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// --- prepare ----------------------------------------------------------------

struct PrepareArgs {
  std::string manifest;
  std::string out;
  std::uint64_t seed = 42;
  SplitOptions split;
};

int cmd_prepare(const PrepareArgs& a) {
  const auto manifest = require_manifest(a.manifest);
  const auto balanced = balance_by_gender(manifest, a.seed);
  std::vector<std::string> warnings;
  const auto set = split(balanced, a.seed, a.split, &warnings);
  const fs::path out = a.out;
  write_manifest(out / "train.csv", set.train);
  write_manifest(out / "validation.csv", set.validation);
  write_manifest(out / "test.csv", set.test);

  nlohmann::json counts = {{"source", a.manifest}, {"seed", a.seed}, {"warnings", warnings}};
  auto describe = [](const Manifest& m) {
    nlohmann::json j = {{"total", m.records.size()}};
    for (const auto g : {Gender::Male, Gender::Female}) {
      for (const auto l : {Label::Fake, Label::Real}) {
        j[fmt::format("{}_{}", to_string(g), to_string(l))] = m.count(g, l);
      }
    }
    return j;
  };
  counts["input"] = describe(manifest);
  counts["balanced"] = describe(balanced);
  counts["train"] = describe(set.train);
  counts["validation"] = describe(set.validation);
  counts["test"] = describe(set.test);
  write_text_file(out / "counts.json", counts.dump(2) + "\n");

  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  std::cout << fmt::format("train {} / validation {} / test {} written to {}\n", set.train.records.size(),
                           set.validation.records.size(), set.test.records.size(), out.string());
  return kExitSatisfied;
}

// --- perturb ----------------------------------------------------------------

int cmd_perturb(const CommonArgs& a, const std::string& tc_name) {
  const auto tc = parse_test_case(tc_name);
  auto manifest = require_manifest(a.manifest);
  const auto style = resolve_style(a.style);
  RunOptions options;
  options.data_root = resolve_data_root(a);
  options.work_dir = a.out;
  options.landmarks = LandmarkMode::parse(a.landmarks);
  options.jobs = a.jobs;

  MtRunner runner(std::move(manifest), style, options);
  auto corpus = runner.perturb(tc);
  auto exclusions = runner.exclusions();
  exclusions.insert(exclusions.end(), corpus.exclusions.begin(), corpus.exclusions.end());
  write_text_file(fs::path(a.out) / "exclusions.csv", exclusion_csv(exclusions));
  std::cout << fmt::format("{}: {} images written under {}, {} excluded\n", to_string(tc), corpus.images.size(),
                           (fs::path(a.out) / std::string(to_string(tc))).string(), exclusions.size());
  return kExitSatisfied;
}

// --- run --------------------------------------------------------------------

struct RunArgs {
  std::string endpoint;
  std::string mrs = "MR01,MR02,MR03";
  VerdictConfig verdict;
  std::uint64_t seed = 42;
  double timeout_s = 30.0;
  int max_in_flight = 4;
  bool inline_images = false;
};

int cmd_run(const CommonArgs& a, const RunArgs& r) {
  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  const auto mr_names = split_list(r.mrs);
  std::vector<MrId> mr_ids;
  for (const auto& s : mr_names) mr_ids.push_back(parse_mr(s));
  if (mr_ids.empty()) throw ParameterError("no MR selected");
  r.verdict.validate();

  auto manifest = require_manifest(a.manifest);
  const auto manifest_hash = sha256_hex(read_file(a.manifest));
  const auto style = resolve_style(a.style);
  const auto data_root = resolve_data_root(a);

  ClassifierEndpoint defaults;
  if (!(r.timeout_s > 0.0)) throw ParameterError("timeout must be positive");
  defaults.timeout = std::chrono::milliseconds(static_cast<long long>(r.timeout_s * 1000.0));
  defaults.max_in_flight = r.max_in_flight;
  defaults.inline_images = r.inline_images;
  auto classifier = classifier_from_spec(r.endpoint, data_root, defaults);

  const fs::path out = a.out;
  RunOptions options;
  options.data_root = data_root;
  options.work_dir = out / "perturbed";
  options.landmarks = LandmarkMode::parse(a.landmarks);
  options.verdict = r.verdict;
  options.jobs = a.jobs;

  RunReport report;
  report.run.manifest_path = a.manifest;
  report.run.manifest_sha256 = manifest_hash;
  report.run.data_root = data_root.string();
  report.run.seed = r.seed;
  report.run.style_source = style.source();
  report.run.style_version = style.version();
  report.run.style_sha256 = style.sha256();
  report.run.region_mapping = style.mapping() == RegionTestCaseMapping::BlushFirst ? "blush-first" : "eyes-first";
  report.run.verdict = r.verdict;
  report.run.max_failure_fraction = options.max_failure_fraction;
  report.run.eligibility = options.eligibility;
  report.run.endpoint = classifier->describe();
  report.run.landmarks = options.landmarks.describe();
  for (const auto id : mr_ids) report.run.mrs.emplace_back(to_string(id));
  report.run.manifest_images = manifest.records.size();

  MtRunner runner(std::move(manifest), style, options);
  for (const auto& rec : runner.baseline(*classifier)) {
    if (rec.ok()) report.benchmark[static_cast<int>(rec.gender)].add(rec.ground_truth, rec.predicted);
  }
  for (const auto id : mr_ids) {
    report.results.push_back(runner.run(id, *classifier));
    std::cout << fmt::format("{}: {}\n", to_string(id), to_string(report.results.back().verdict));
    for (const auto& tc : report.results.back().test_cases) {
      std::cout << fmt::format("  {} {}: {}\n", to_string(tc.tc), tc.label, to_string(tc.verdict));
      for (const auto& reason : tc.reasons) std::cout << "    " << reason << '\n';
    }
  }
  report.run.eligible_images = runner.eligible().size();
  report.run.exclusions = runner.exclusions();

  emit_report(report, out);
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const nlohmann::json times = {{"started", started}, {"finished", utc_now()}, {"elapsed_seconds", elapsed}};
  write_text_file(out / "run_times.json", times.dump(2) + "\n");

  const auto overall = report.overall();
  std::cout << fmt::format("overall: {} (report in {})\n", to_string(overall), out.string());
  return overall == Verdict::Satisfied ? kExitSatisfied : kExitViolated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metamorphic testing of face-forgery classifiers under makeup perturbations"};
  app.require_subcommand(1);

  CommonArgs common;
  PrepareArgs prep;
  RunArgs run;
  std::string tc_name;

  auto* prepare = app.add_subcommand("prepare", "Balance a manifest by gender and split it into train/validation/test");
  prepare->add_option("--manifest", prep.manifest, "Input manifest CSV")->required();
  prepare->add_option("--seed", prep.seed, "Shuffle seed")->capture_default_str();
  prepare->add_option("--out", prep.out, "Output directory")->required();
  prepare->add_option("--train-parts", prep.split.train_parts, "Training pool share of the train:test ratio")
      ->capture_default_str();
  prepare->add_option("--test-parts", prep.split.test_parts, "Test share of the train:test ratio")
      ->capture_default_str();
  prepare->add_option("--validation-fraction", prep.split.validation_fraction,
                      "Fraction of the training pool held out for validation")
      ->capture_default_str();

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--manifest", common.manifest, "Test manifest CSV")->required();
    sub->add_option("--data-root", common.data_root, "Root for relative paths (default: manifest directory)");
    sub->add_option("--landmarks", common.landmarks, "files | detector:<command>")->capture_default_str();
    sub->add_option("--style", common.style, "Style file (default: $FACEMT_STYLE, else built-in)");
    sub->add_option("--jobs", common.jobs, "Worker threads (0 = all CPUs)")->capture_default_str();
    sub->add_option("--out", common.out, "Output directory")->required();
  };

  auto* perturb = app.add_subcommand("perturb", "Write the perturbed copy of a manifest for one test case");
  add_common(perturb);
  perturb->add_option("--tc", tc_name, "Test case TC01..TC07")->required();

  auto* runcmd = app.add_subcommand("run", "Run the selected MRs and write the report");
  add_common(runcmd);
  runcmd->add_option("--endpoint", run.endpoint, "cmd:<template> | http:<url> | stub:<name>[:<param>]")->required();
  runcmd->add_option("--mr", run.mrs, "Comma-separated MR ids")->capture_default_str();
  runcmd->add_option("--max-acc-delta", run.verdict.max_accuracy_delta_pp, "Accuracy delta limit (pp)")
      ->capture_default_str();
  runcmd->add_option("--max-flip-rate", run.verdict.max_flip_rate, "Decision flip rate limit")->capture_default_str();
  runcmd->add_option("--threshold", run.verdict.threshold, "Score threshold for a REAL decision")
      ->capture_default_str();
  runcmd->add_option("--seed", run.seed, "Seed recorded in the run manifest")->capture_default_str();
  runcmd->add_option("--timeout", run.timeout_s, "Per-request timeout in seconds")->capture_default_str();
  runcmd->add_option("--max-in-flight", run.max_in_flight, "Concurrent requests")->capture_default_str();
  runcmd->add_flag("--inline-images", run.inline_images, "Send base64 PNG instead of file paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFailure;
  }

  try {
    if (*prepare) return cmd_prepare(prep);
    if (*perturb) return cmd_perturb(common, tc_name);
    return cmd_run(common, run);
  } catch (const std::exception& e) {
    std::cerr << "facemt: " << e.what() << '\n';
    return kExitFailure;
  }
}
