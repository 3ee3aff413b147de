#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "verikit/verify/batch.hpp"

namespace verikit::io {

/// Settings that determine verification output.
struct RunConfig {
  Thresholds thresholds;
  RansacConfig ransac;
  TestSet enabled;
  std::size_t viewpoints = 0;

  /// Keys: alpha_rig, alpha_color, alpha_prec, alpha_rec, eta_diff, eta_iou,
  /// iterations, epsilon, seed, min_correspondences, stride, max_count,
  /// enabled (comma list), viewpoints. Hyphens in keys are read as
  /// underscores. Unknown keys and unparsable values are validation errors.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  /// Every key with its current value, sorted by key; numbers use the
  /// shortest round-trip form.
  std::map<std::string, std::string> snapshot() const;

  BatchOptions batch_options(ScoreMode mode = ScoreMode::short_circuit) const;
};

bool is_config_key(const std::string& key);

using ConfigPairs = std::vector<std::pair<std::string, std::string>>;

/// key = value lines in file order; '#' starts a comment outside quotes,
/// [section] headers are ignored, values may be quoted.
ConfigPairs parse_config_pairs(const std::string& text, const std::string& source);

/// Pairs from a key=value file, or from the "config" object of a run
/// manifest (a JSON file), in which case `is_manifest` is set.
ConfigPairs read_config_pairs(const std::filesystem::path& path, bool* is_manifest = nullptr);

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source);

/// A key=value file, or a run manifest (JSON with a "config" object).
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace verikit::io
