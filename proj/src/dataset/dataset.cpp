#include "facemt/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "facemt/errors.hpp"

namespace facemt {

namespace {

constexpr std::string_view kHeader = "image_path,label,gender,landmark_path";

// std::uniform_int_distribution is implementation-defined; splits must be
// reproducible across standard libraries, so draw with plain rejection.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_below(rng, i))]);
  }
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

constexpr std::array<std::pair<Gender, Label>, 4> kStrata = {
    std::pair{Gender::Male, Label::Fake}, std::pair{Gender::Male, Label::Real},
    std::pair{Gender::Female, Label::Fake}, std::pair{Gender::Female, Label::Real}};

Manifest subset(const Manifest& src, std::vector<std::size_t> indices, std::string provenance) {
  std::sort(indices.begin(), indices.end());
  Manifest m;
  m.provenance = std::move(provenance);
  m.records.reserve(indices.size());
  for (const auto i : indices) m.records.push_back(src.records[i]);
  return m;
}

}  // namespace

std::string_view to_string(Label l) { return l == Label::Fake ? "fake" : "real"; }
std::string_view to_string(Gender g) { return g == Gender::Male ? "male" : "female"; }

std::optional<Label> parse_label(std::string_view s) {
  if (s == "fake") return Label::Fake;
  if (s == "real") return Label::Real;
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "male") return Gender::Male;
  if (s == "female") return Gender::Female;
  return std::nullopt;
}

std::size_t Manifest::count(Gender g, Label l) const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const SampleRecord& r) {
    return r.gender == g && r.label == l;
  }));
}

std::size_t Manifest::count(Gender g) const { return count(g, Label::Fake) + count(g, Label::Real); }

long long round_half_up(double x) { return static_cast<long long>(std::floor(x + 0.5 + 1e-9)); }

Manifest parse_manifest(std::string_view csv_text, std::string provenance) {
  Manifest m;
  m.provenance = std::move(provenance);
  std::istringstream in{std::string(csv_text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<std::string> problems;
  std::unordered_set<std::string> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kHeader) {
        throw SchemaError(m.provenance + ":" + std::to_string(line_no) + ": expected header '" +
                          std::string(kHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    const std::string where = m.provenance + ":" + std::to_string(line_no) + ": ";
    if (f.size() != 3 && f.size() != 4) {
      problems.push_back(where + "expected 4 fields, got " + std::to_string(f.size()));
      continue;
    }
    const auto label = parse_label(f[1]);
    const auto gender = parse_gender(f[2]);
    if (f[0].empty()) problems.push_back(where + "empty image_path");
    if (!label) problems.push_back(where + "unknown label '" + f[1] + "'");
    if (!gender) problems.push_back(where + "unknown gender '" + f[2] + "'");
    if (f[0].empty() || !label || !gender) continue;
    if (!seen.insert(f[0]).second) {
      throw DuplicateError(where + "duplicate image_path '" + f[0] + "'");
    }
    m.records.push_back({f[0], *label, *gender, f.size() == 4 ? f[3] : std::string{}});
  }
  if (!header_seen) throw SchemaError(m.provenance + ": empty manifest (no header)");
  if (!problems.empty()) {
    std::string msg = "manifest rows rejected:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw SchemaError(msg);
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FilesystemError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.string());
}

std::string format_manifest(const Manifest& manifest) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& r : manifest.records) {
    out += csv_field(r.image_path) + ',' + std::string(to_string(r.label)) + ',' +
           std::string(to_string(r.gender)) + ',' + csv_field(r.landmark_path) + '\n';
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FilesystemError("cannot write manifest " + path.string());
  out << format_manifest(manifest);
}

Manifest balance_by_gender(const Manifest& manifest, std::uint64_t seed) {
  if (manifest.count(Gender::Male) == 0 || manifest.count(Gender::Female) == 0) {
    throw BalanceImpossibleError("cannot balance " + manifest.provenance + ": " +
                                 (manifest.count(Gender::Male) == 0 ? "no male" : "no female") + " records");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  for (const Label label : {Label::Fake, Label::Real}) {
    std::array<std::vector<std::size_t>, 2> cells;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      const auto& r = manifest.records[i];
      if (r.label == label) cells[r.gender == Gender::Male ? 0 : 1].push_back(i);
    }
    const std::size_t target = std::min(cells[0].size(), cells[1].size());
    for (auto& cell : cells) {
      shuffle(cell, rng);
      keep.insert(keep.end(), cell.begin(), cell.begin() + static_cast<std::ptrdiff_t>(target));
    }
  }
  return subset(manifest, std::move(keep), manifest.provenance + " (balanced, seed " + std::to_string(seed) + ")");
}

SplitSet split(const Manifest& manifest, std::uint64_t seed, const SplitOptions& options,
               std::vector<std::string>* warnings) {
  if (manifest.records.empty()) throw ParameterError("cannot split an empty manifest");
  if (options.train_parts <= 0 || options.test_parts < 0) throw ParameterError("split ratio parts must be positive");
  if (options.validation_fraction < 0.0 || options.validation_fraction >= 1.0) {
    throw ParameterError("validation fraction must lie in [0,1)");
  }
  const double pool_share = static_cast<double>(options.train_parts) / (options.train_parts + options.test_parts);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  for (const auto& [gender, label] : kStrata) {
    std::vector<std::size_t> stratum;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      if (manifest.records[i].gender == gender && manifest.records[i].label == label) stratum.push_back(i);
    }
    if (stratum.empty()) continue;
    if (stratum.size() < 5) {
      if (warnings) {
        warnings->push_back("stratum " + std::string(to_string(gender)) + "/" + std::string(to_string(label)) +
                            " has " + std::to_string(stratum.size()) + " records; assigned wholly to train");
      }
      train.insert(train.end(), stratum.begin(), stratum.end());
      continue;
    }
    shuffle(stratum, rng);
    const auto n = stratum.size();
    const auto pool = std::min<std::size_t>(n, static_cast<std::size_t>(round_half_up(n * pool_share)));
    const auto val = static_cast<std::size_t>(round_half_up(pool * options.validation_fraction));
    validation.insert(validation.end(), stratum.begin(), stratum.begin() + static_cast<std::ptrdiff_t>(val));
    train.insert(train.end(), stratum.begin() + static_cast<std::ptrdiff_t>(val),
                 stratum.begin() + static_cast<std::ptrdiff_t>(pool));
    test.insert(test.end(), stratum.begin() + static_cast<std::ptrdiff_t>(pool), stratum.end());
  }
  SplitSet s;
  s.seed = seed;
  s.train = subset(manifest, std::move(train), manifest.provenance + " [train]");
  s.validation = subset(manifest, std::move(validation), manifest.provenance + " [validation]");
  s.test = subset(manifest, std::move(test), manifest.provenance + " [test]");
  return s;
}

}  // namespace facemt
