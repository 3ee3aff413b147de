#include "verikit/io/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

#include "verikit/core/io.hpp"
#include "verikit/util/error.hpp"

namespace verikit::io {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 14> kKeys = {
    "alpha_color", "alpha_prec", "alpha_rec", "alpha_rig", "enabled", "epsilon", "eta_diff",
    "eta_iou", "iterations", "max_count", "min_correspondences", "seed", "stride", "viewpoints"};

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ValidationError(key + ": not a number: '" + v + "'");
  return out;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ValidationError(key + ": not an integer: '" + v + "'");
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

bool is_config_key(const std::string& key) {
  const std::string k = normalize_key(key);
  return std::find_if(kKeys.begin(), kKeys.end(), [&](const char* n) { return k == n; }) !=
         kKeys.end();
}

void RunConfig::set(const std::string& raw_key, const std::string& value) {
  const std::string key = normalize_key(raw_key);
  Thresholds& t = thresholds;
  if (key == "alpha_rig") t.alpha_rig = parse_double(key, value);
  else if (key == "alpha_color") t.alpha_color = parse_double(key, value);
  else if (key == "alpha_prec") t.alpha_prec = parse_double(key, value);
  else if (key == "alpha_rec") t.alpha_rec = parse_double(key, value);
  else if (key == "eta_diff") t.eta_diff = parse_double(key, value);
  else if (key == "eta_iou") t.eta_iou = parse_double(key, value);
  else if (key == "iterations") ransac.iterations = parse_integer<int>(key, value);
  else if (key == "epsilon") ransac.epsilon = parse_double(key, value);
  else if (key == "seed") ransac.seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "min_correspondences")
    ransac.min_correspondences = parse_integer<std::size_t>(key, value);
  else if (key == "stride") ransac.stride = parse_integer<int>(key, value);
  else if (key == "max_count") ransac.max_count = parse_integer<std::size_t>(key, value);
  else if (key == "enabled") enabled = value.empty() ? TestSet::none() : TestSet::parse(value);
  else if (key == "viewpoints") viewpoints = parse_integer<std::size_t>(key, value);
  else throw ValidationError("unknown config key '" + raw_key + "'");
}

void RunConfig::validate() const {
  thresholds.validate();
  ransac.validate();
}

std::map<std::string, std::string> RunConfig::snapshot() const {
  return {{"alpha_rig", format_double(thresholds.alpha_rig)},
          {"alpha_color", format_double(thresholds.alpha_color)},
          {"alpha_prec", format_double(thresholds.alpha_prec)},
          {"alpha_rec", format_double(thresholds.alpha_rec)},
          {"eta_diff", format_double(thresholds.eta_diff)},
          {"eta_iou", format_double(thresholds.eta_iou)},
          {"iterations", std::to_string(ransac.iterations)},
          {"epsilon", format_double(ransac.epsilon)},
          {"seed", std::to_string(ransac.seed)},
          {"min_correspondences", std::to_string(ransac.min_correspondences)},
          {"stride", std::to_string(ransac.stride)},
          {"max_count", std::to_string(ransac.max_count)},
          {"enabled", join(enabled.names())},
          {"viewpoints", std::to_string(viewpoints)}};
}

BatchOptions RunConfig::batch_options(ScoreMode mode) const {
  BatchOptions b;
  b.verify.thresholds = thresholds;
  b.verify.ransac = ransac;
  b.verify.enabled = enabled;
  b.verify.mode = mode;
  b.viewpoints = viewpoints;
  return b;
}

ConfigPairs parse_config_pairs(const std::string& text, const std::string& source) {
  ConfigPairs out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty() || (line.front() == '[' && line.back() == ']')) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(source + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ValidationError(source + ":" + std::to_string(line_no) + ": empty key");
    out.emplace_back(key, value);
  }
  return out;
}

ConfigPairs read_config_pairs(const std::filesystem::path& path, bool* is_manifest) {
  const auto bytes = read_bytes(path);
  const std::string text(bytes.begin(), bytes.end());
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool manifest = first != std::string::npos && text[first] == '{';
  if (is_manifest) *is_manifest = manifest;
  if (!manifest) return parse_config_pairs(text, path.string());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!j.contains("config") || !j.at("config").is_object())
    throw ValidationError(path.string() + ": manifest has no config object");
  ConfigPairs out;
  for (const auto& [key, value] : j.at("config").items())
    out.emplace_back(key, value.is_string() ? value.get<std::string>() : value.dump());
  return out;
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source) {
  for (const auto& [key, value] : parse_config_pairs(text, source)) {
    try {
      cfg.set(key, value);
    } catch (const ValidationError& e) {
      throw ValidationError(source + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  bool manifest = false;
  const ConfigPairs pairs = read_config_pairs(path, &manifest);
  for (const auto& [key, value] : pairs) {
    if (manifest && !is_config_key(key)) continue;  // settings of other subcommands
    try {
      cfg.set(key, value);
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  }
}

}  // namespace verikit::io
