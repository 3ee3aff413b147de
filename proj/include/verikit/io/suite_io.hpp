#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "verikit/verify/batch.hpp"

namespace verikit::io {

/// Suite layout: scenes/NNN.png, templates/CLS/MM.png (+ MM.mask.png),
/// flows/sNNN_dNNNN_cN_tNN.vflw, annotations.jsonl.
struct SuitePaths {
  std::filesystem::path scenes;
  std::filesystem::path templates;
  std::filesystem::path flows;
  std::filesystem::path annotations;

  static SuitePaths under(const std::filesystem::path& root);
};

std::string scene_file_name(int scene_id);
std::string flow_file_name(int scene_id, const FlowKey& key);

void write_suite(const SuitePaths& paths, const Suite& suite);

/// Loads scenes named in the annotations, every template set, and every flow
/// file; a missing flows directory yields a suite without flows. Flow files
/// whose name does not follow the layout, or that reference an unknown
/// detection or template, are validation errors.
Suite read_suite(const SuitePaths& paths, bool load_flows = true);

/// Template sets only.
std::vector<TemplateSet> read_templates(const std::filesystem::path& dir);

/// Every regular file under the given roots, sorted by path.
std::vector<std::filesystem::path> list_files(const std::vector<std::filesystem::path>& roots);

}  // namespace verikit::io
