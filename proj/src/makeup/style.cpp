#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "facemt/errors.hpp"
#include "facemt/makeup.hpp"
#include "json.hpp"

namespace facemt {

namespace detail {
extern const std::string_view kDefaultStyleJson;
}

namespace {

constexpr std::array<IntensityLevel, 3> kFixedLevels = {IntensityLevel::Light, IntensityLevel::Medium,
                                                        IntensityLevel::Heavy};
constexpr std::array<SkinTone, 3> kTones = {SkinTone::Light, SkinTone::Medium, SkinTone::Deep};

std::string cell_key(Component c, IntensityLevel l, SkinTone t) {
  return std::string(to_string(c)) + "." + std::string(to_string(l)) + "." + std::string(to_string(t));
}

double number_or(const nlohmann::json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw StyleError(std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

}  // namespace

std::string_view to_string(Component c) {
  switch (c) {
    case Component::Eyeliner: return "eyeliner";
    case Component::Eyeshadow: return "eyeshadow";
    case Component::Blush: return "blush";
    case Component::Lipstick: return "lipstick";
  }
  return "?";
}

std::string_view to_string(IntensityLevel l) {
  switch (l) {
    case IntensityLevel::Adaptive: return "adaptive";
    case IntensityLevel::Light: return "light";
    case IntensityLevel::Medium: return "medium";
    case IntensityLevel::Heavy: return "heavy";
  }
  return "?";
}

std::string_view to_string(SkinTone t) {
  switch (t) {
    case SkinTone::Light: return "light";
    case SkinTone::Medium: return "medium";
    case SkinTone::Deep: return "deep";
  }
  return "?";
}

std::string_view to_string(TestCaseId tc) {
  static constexpr std::array<std::string_view, 7> names = {"TC01", "TC02", "TC03", "TC04",
                                                            "TC05", "TC06", "TC07"};
  return names[static_cast<std::size_t>(tc)];
}

Component parse_component(std::string_view s) {
  for (const auto c : {Component::Eyeliner, Component::Eyeshadow, Component::Blush, Component::Lipstick}) {
    if (to_string(c) == s) return c;
  }
  throw ParameterError("unknown makeup component '" + std::string(s) + "'");
}

IntensityLevel parse_level(std::string_view s) {
  for (const auto l : {IntensityLevel::Adaptive, IntensityLevel::Light, IntensityLevel::Medium,
                       IntensityLevel::Heavy}) {
    if (to_string(l) == s) return l;
  }
  throw ParameterError("unknown intensity level '" + std::string(s) + "'");
}

SkinTone parse_tone(std::string_view s) {
  for (const auto t : kTones) {
    if (to_string(t) == s) return t;
  }
  throw ParameterError("unknown skin tone '" + std::string(s) + "'");
}

TestCaseId parse_test_case(std::string_view s) {
  for (const auto tc : kAllTestCases) {
    if (to_string(tc) == s) return tc;
  }
  throw ParameterError("unknown test case '" + std::string(s) + "'");
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string_view default_style_json() { return detail::kDefaultStyleJson; }

StyleConfig StyleConfig::defaults() { return parse(default_style_json(), "<built-in default>"); }

StyleConfig StyleConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StyleError("cannot open style file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

StyleConfig StyleConfig::parse(std::string_view json_text, std::string source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw StyleError(source + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "facemt-style/1") {
    throw StyleError(source + ": expected \"format\": \"facemt-style/1\"");
  }

  StyleConfig cfg;
  cfg.source_ = std::move(source);
  cfg.sha256_ = sha256_hex(json_text);
  cfg.version_ = doc.value("version", "unversioned");
  try {
    cfg.blur_sigma_ = number_or(doc, "blur_sigma", 2.0);
    cfg.adaptive_tint_ = number_or(doc, "adaptive_tint", 0.25);
    if (doc.contains("skin_tone")) {
      cfg.thresholds_.light_min = number_or(doc["skin_tone"], "light_min", 170.0);
      cfg.thresholds_.medium_min = number_or(doc["skin_tone"], "medium_min", 100.0);
    }
    if (doc.contains("geometry")) {
      const auto& g = doc["geometry"];
      cfg.geometry_.eyeliner_extrusion = number_or(g, "eyeliner_extrusion", 0.06);
      cfg.geometry_.blush_radius = number_or(g, "blush_radius", 0.18);
      cfg.geometry_.blush_aspect = number_or(g, "blush_aspect", 0.8);
      cfg.geometry_.sample_shrink = number_or(g, "sample_shrink", 0.10);
      cfg.geometry_.samples_per_segment = static_cast<int>(number_or(g, "samples_per_segment", 8));
    }
  } catch (const StyleError& e) {
    throw StyleError(cfg.source_ + ": " + e.what());
  }
  const std::string mapping = doc.value("region_test_cases", "blush-first");
  if (mapping == "blush-first") {
    cfg.mapping_ = RegionTestCaseMapping::BlushFirst;
  } else if (mapping == "eyes-first") {
    cfg.mapping_ = RegionTestCaseMapping::EyesFirst;
  } else {
    throw StyleError(cfg.source_ + ": region_test_cases must be \"blush-first\" or \"eyes-first\"");
  }

  if (!std::isfinite(cfg.blur_sigma_) || cfg.blur_sigma_ < 0.0) throw StyleError(cfg.source_ + ": blur_sigma < 0");
  if (cfg.adaptive_tint_ < 0.0 || cfg.adaptive_tint_ > 1.0) throw StyleError(cfg.source_ + ": adaptive_tint outside [0,1]");
  if (!(cfg.thresholds_.medium_min < cfg.thresholds_.light_min)) {
    throw StyleError(cfg.source_ + ": skin_tone.medium_min must be below light_min");
  }
  if (cfg.geometry_.samples_per_segment < 1) throw StyleError(cfg.source_ + ": samples_per_segment < 1");
  if (cfg.geometry_.sample_shrink < 0.0 || cfg.geometry_.sample_shrink >= 0.5) {
    throw StyleError(cfg.source_ + ": sample_shrink outside [0,0.5)");
  }

  if (!doc.contains("styles") || !doc["styles"].is_object()) throw StyleError(cfg.source_ + ": missing 'styles'");
  const auto& styles = doc["styles"];
  for (const auto c : kApplicationOrder) {
    for (const auto l : kFixedLevels) {
      for (const auto t : kTones) {
        const std::string key = cell_key(c, l, t);
        if (!styles.contains(key)) throw StyleError(cfg.source_ + ": missing style cell " + key);
        const auto& cell = styles[key];
        const auto& rgb = cell.value("rgb", nlohmann::json::array());
        if (!rgb.is_array() || rgb.size() != 3) throw StyleError(cfg.source_ + ": " + key + ".rgb needs 3 values");
        ComponentStyle s;
        std::array<std::uint8_t, 3> ch{};
        for (std::size_t i = 0; i < 3; ++i) {
          if (!rgb[i].is_number_integer() || rgb[i].get<int>() < 0 || rgb[i].get<int>() > 255) {
            throw StyleError(cfg.source_ + ": " + key + ".rgb values must be integers in [0,255]");
          }
          ch[i] = static_cast<std::uint8_t>(rgb[i].get<int>());
        }
        s.color = {ch[0], ch[1], ch[2]};
        if (!cell.contains("alpha") || !cell["alpha"].is_number()) throw StyleError(cfg.source_ + ": " + key + ".alpha missing");
        s.alpha = cell["alpha"].get<double>();
        if (!(s.alpha >= 0.0 && s.alpha <= 1.0)) throw StyleError(cfg.source_ + ": " + key + ".alpha outside [0,1]");
        cfg.cells_.emplace(key, s);
      }
    }
    for (const auto t : kTones) {
      const double a_light = cfg.cells_.at(cell_key(c, IntensityLevel::Light, t)).alpha;
      const double a_medium = cfg.cells_.at(cell_key(c, IntensityLevel::Medium, t)).alpha;
      const double a_heavy = cfg.cells_.at(cell_key(c, IntensityLevel::Heavy, t)).alpha;
      if (!(a_light < a_medium && a_medium < a_heavy)) {
        throw StyleError(cfg.source_ + ": alphas for " + std::string(to_string(c)) + "/" +
                         std::string(to_string(t)) + " must strictly increase light < medium < heavy");
      }
    }
  }
  return cfg;
}

const ComponentStyle& StyleConfig::cell(Component c, IntensityLevel level, SkinTone tone) const {
  if (level == IntensityLevel::Adaptive) throw ParameterError("adaptive level has no fixed style cell");
  return cells_.at(cell_key(c, level, tone));
}

void StyleConfig::set_blur_sigma(double sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0) throw ParameterError("blur sigma must be >= 0");
  blur_sigma_ = sigma;
}

}  // namespace facemt
