#include "verikit/io/report_io.hpp"

#include <json.hpp>

#include <sstream>

#include "verikit/core/io.hpp"
#include "verikit/util/error.hpp"

namespace verikit::io {

using nlohmann::json;

namespace {

json optional_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_of(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json scores_json(const TestScores& s) {
  json j;
  j["template"] = s.template_index;
  j["sim"] = s.sim_score;
  j["f_color"] = optional_value(s.f_color);
  j["f_inlier"] = optional_value(s.f_inlier);
  j["f_precision"] = optional_value(s.f_precision);
  j["f_recall"] = optional_value(s.f_recall);
  j["pass"] = {{"sim", s.sim_pass},
               {"f_color", s.color_pass},
               {"f_inlier", s.inlier_pass},
               {"f_precision", s.precision_pass},
               {"f_recall", s.recall_pass}};
  j["ncc_informative"] = s.ncc_informative;
  j["flow_missing"] = s.flow_missing;
  j["passed"] = s.passed;
  return j;
}

TestScores scores_of(const json& j) {
  TestScores s;
  s.template_index = j.at("template").get<int>();
  s.sim_score = j.at("sim").get<double>();
  s.f_color = optional_of(j, "f_color");
  s.f_inlier = optional_of(j, "f_inlier");
  s.f_precision = optional_of(j, "f_precision");
  s.f_recall = optional_of(j, "f_recall");
  const json& p = j.at("pass");
  s.sim_pass = p.at("sim").get<bool>();
  s.color_pass = p.at("f_color").get<bool>();
  s.inlier_pass = p.at("f_inlier").get<bool>();
  s.precision_pass = p.at("f_precision").get<bool>();
  s.recall_pass = p.at("f_recall").get<bool>();
  s.ncc_informative = j.at("ncc_informative").get<bool>();
  s.flow_missing = j.at("flow_missing").get<bool>();
  s.passed = j.at("passed").get<bool>();
  return s;
}

}  // namespace

std::string report_line(const DetectionReport& r) {
  const Detection& d = r.detection;
  json j;
  j["scene"] = r.scene_id;
  j["detection_id"] = d.detection_id;
  j["class_id"] = d.class_id;
  j["box"] = {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max};
  j["confidence"] = d.confidence;
  j["accepted"] = r.result.accepted;
  j["reason"] = r.result.reason;
  j["best_template"] = r.result.best_template
                           ? json(r.result.templates[*r.result.best_template].template_index)
                           : json(nullptr);
  json templates = json::array();
  for (const TestScores& s : r.result.templates) templates.push_back(scores_json(s));
  j["templates"] = std::move(templates);
  return j.dump();
}

std::string format_reports(const std::vector<DetectionReport>& reports) {
  std::string out;
  for (const DetectionReport& r : reports) {
    out += report_line(r);
    out += '\n';
  }
  return out;
}

DetectionReport parse_report_line(const std::string& line, const std::string& source) {
  try {
    const json j = json::parse(line);
    DetectionReport r;
    r.scene_id = j.at("scene").get<int>();
    r.detection.detection_id = j.at("detection_id").get<std::int64_t>();
    r.detection.class_id = j.at("class_id").get<int>();
    const auto box = j.at("box").get<std::vector<double>>();
    if (box.size() != 4) throw ValidationError(source + ": box must have 4 numbers");
    r.detection.box = make_box(box[0], box[1], box[2], box[3]);
    r.detection.confidence = j.at("confidence").get<double>();
    r.result.accepted = j.at("accepted").get<bool>();
    r.result.reason = j.at("reason").get<std::string>();
    for (const json& t : j.at("templates")) r.result.templates.push_back(scores_of(t));
    if (!j.at("best_template").is_null()) {
      const int best = j.at("best_template").get<int>();
      for (std::size_t i = 0; i < r.result.templates.size(); ++i)
        if (r.result.templates[i].template_index == best) r.result.best_template = i;
      if (!r.result.best_template)
        throw ValidationError(source + ": best_template " + std::to_string(best) + " not listed");
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

std::vector<DetectionReport> parse_reports(const std::string& text, const std::string& source) {
  std::vector<DetectionReport> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_report_line(line, source + ":" + std::to_string(line_no)));
  }
  return out;
}

std::vector<DetectionReport> read_reports(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return parse_reports(std::string(bytes.begin(), bytes.end()), path.string());
}

}  // namespace verikit::io
