#include "verikit/io/suite_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <regex>

#include "verikit/core/io.hpp"
#include "verikit/util/error.hpp"

namespace fs = std::filesystem;

namespace verikit::io {

SuitePaths SuitePaths::under(const fs::path& root) {
  return {root / "scenes", root / "templates", root / "flows", root / "annotations.jsonl"};
}

std::string scene_file_name(int scene_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03d.png", scene_id);
  return buf;
}

std::string flow_file_name(int scene_id, const FlowKey& key) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "s%03d_d%04lld_c%d_t%02d.vflw", scene_id,
                static_cast<long long>(key.detection_id), key.class_id, key.template_index);
  return buf;
}

namespace {

std::string two_digit(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

void write_suite(const SuitePaths& paths, const Suite& suite) {
  fs::create_directories(paths.scenes);
  fs::create_directories(paths.templates);
  fs::create_directories(paths.flows);
  Annotations ann;
  for (const SceneRecord& s : suite.scenes) {
    write_png(paths.scenes / scene_file_name(s.scene_id), s.scene);
    ann.ground_truth[s.scene_id] = s.ground_truth;
    ann.detections[s.scene_id] = s.detections;
    for (const auto& [key, flow] : s.flows) write_flow(paths.flows / flow_file_name(s.scene_id, key), flow);
  }
  for (const TemplateSet& set : suite.templates) {
    const fs::path dir = paths.templates / std::to_string(set.class_id);
    for (std::size_t m = 0; m < set.templates.size(); ++m) {
      const std::string stem = two_digit(static_cast<int>(m));
      write_png(dir / (stem + ".png"), set.templates[m]);
      if (const Mask* mask = set.mask(m)) write_mask_png(dir / (stem + ".mask.png"), *mask);
    }
  }
  write_text(paths.annotations, format_annotations(ann));
}

std::vector<TemplateSet> read_templates(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("template directory " + dir.string() + " not found");
  std::vector<std::pair<int, fs::path>> classes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && all_digits(name)) classes.emplace_back(std::stoi(name), entry.path());
  }
  std::sort(classes.begin(), classes.end());
  std::vector<TemplateSet> out;
  for (const auto& [cls, path] : classes) {
    std::vector<std::pair<int, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      const std::string name = entry.path().filename().string();
      const std::string stem = name.size() > 4 ? name.substr(0, name.size() - 4) : "";
      if (entry.is_regular_file() && name.ends_with(".png") && all_digits(stem))
        files.emplace_back(std::stoi(stem), entry.path());
    }
    std::sort(files.begin(), files.end());
    TemplateSet set;
    set.class_id = cls;
    bool any_mask = false;
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (files[i].first != static_cast<int>(i))
        throw ValidationError("templates of class " + std::to_string(cls) + " are not numbered 00.." +
                              two_digit(static_cast<int>(files.size()) - 1));
      set.templates.push_back(read_image(files[i].second));
      const fs::path mask_path = path / (two_digit(static_cast<int>(i)) + ".mask.png");
      if (fs::exists(mask_path)) {
        set.masks.resize(i + 1);
        set.masks[i] = read_mask_png(mask_path);
        any_mask = true;
      }
    }
    if (any_mask) set.masks.resize(set.templates.size());
    if (set.templates.empty()) throw ValidationError("class " + std::to_string(cls) + " has no templates");
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<fs::path> list_files(const std::vector<fs::path>& roots) {
  std::vector<fs::path> out;
  for (const fs::path& root : roots) {
    if (fs::is_regular_file(root)) {
      out.push_back(root);
      continue;
    }
    if (!fs::is_directory(root)) continue;
    for (const auto& entry : fs::recursive_directory_iterator(root))
      if (entry.is_regular_file()) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Suite read_suite(const SuitePaths& paths, bool load_flows) {
  const Annotations ann = read_annotations(paths.annotations);
  Suite suite;
  suite.templates = read_templates(paths.templates);
  std::map<int, std::size_t> index;
  for (int id : ann.scene_ids()) {
    SceneRecord rec;
    rec.scene_id = id;
    rec.scene = read_image(paths.scenes / scene_file_name(id));
    if (auto it = ann.ground_truth.find(id); it != ann.ground_truth.end()) rec.ground_truth = it->second;
    if (auto it = ann.detections.find(id); it != ann.detections.end()) rec.detections = it->second;
    index[id] = suite.scenes.size();
    suite.scenes.push_back(std::move(rec));
  }
  if (load_flows && fs::is_directory(paths.flows)) {
    static const std::regex pattern(R"(s(\d+)_d(\d+)_c(\d+)_t(\d+)\.vflw)");
    for (const fs::path& file : list_files({paths.flows})) {
      const std::string name = file.filename().string();
      if (file.extension() != ".vflw") continue;
      std::smatch m;
      if (!std::regex_match(name, m, pattern))
        throw ValidationError(file.string() + ": flow file name does not follow sNNN_dNNNN_cN_tNN.vflw");
      const int scene = std::stoi(m[1].str());
      const FlowKey key{std::stoll(m[2].str()), std::stoi(m[3].str()), std::stoi(m[4].str())};
      const auto it = index.find(scene);
      if (it == index.end()) throw ValidationError(file.string() + ": unknown scene " + m[1].str());
      suite.scenes[it->second].flows.emplace(key, read_flow(file));
    }
  } else if (load_flows) {
    spdlog::warn("flow directory {} not found; every detection will lack flows", paths.flows.string());
  }
  for (const SceneRecord& s : suite.scenes) validate_scene(s, suite.templates);
  return suite;
}

}  // namespace verikit::io
