#include "verikit/verify/tests.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "verikit/core/warp.hpp"
#include "verikit/metrics/metrics.hpp"
#include "verikit/util/error.hpp"

namespace verikit {

void Thresholds::validate() const {
  for (double v : as_array())
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("thresholds must lie in [0,1]");
}

std::string test_name(VerifyTest t) {
  switch (t) {
    case VerifyTest::sim:
      return "sim";
    case VerifyTest::f_color:
      return "f_color";
    case VerifyTest::f_inlier:
      return "f_inlier";
    case VerifyTest::f_precision:
      return "f_precision";
    case VerifyTest::f_recall:
      return "f_recall";
  }
  return "unknown";
}

VerifyTest parse_test(const std::string& name) {
  std::string key;
  for (char c : name)
    if (c != '_' && c != '-' && c != ' ') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "sim" || key == "simscore") return VerifyTest::sim;
  if (key == "fcolor" || key == "color") return VerifyTest::f_color;
  if (key == "finlier" || key == "inlier" || key == "rig") return VerifyTest::f_inlier;
  if (key == "fprecision" || key == "precision" || key == "prec") return VerifyTest::f_precision;
  if (key == "frecall" || key == "recall" || key == "rec") return VerifyTest::f_recall;
  throw ValidationError("unknown verification test '" + name + "'");
}

TestSet TestSet::parse(const std::string& list) {
  TestSet out = none();
  std::istringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(' ') == std::string::npos) continue;
    out = out.with(parse_test(item));
  }
  return out;
}

std::vector<std::string> TestSet::names() const {
  std::vector<std::string> out;
  for (VerifyTest t : kAllTests)
    if (contains(t)) out.push_back(test_name(t));
  return out;
}

double sim_score(const Detection& target, std::span<const Detection> all_detections,
                 double eta_iou) {
  double best = std::numeric_limits<double>::infinity();
  for (const Detection& other : all_detections) {
    if (other.detection_id == target.detection_id || other.class_id == target.class_id) continue;
    if (iou(other.box, target.box) < eta_iou) continue;
    best = std::min(best, std::max(0.0, target.confidence - other.confidence));
  }
  return std::isinf(best) ? 1.0 : best;
}

ColorScore f_color(const Image& templ, const FlowField& flow, const Image& crop) {
  if (templ.channels() != crop.channels())
    throw ValidationError("f_color: template and crop channel counts differ");
  const SplatResult warped = splat_flow(templ, flow, crop.width(), crop.height());
  const NccResult r = ncc(warped.image, crop, &warped.written);
  return {0.5 * (r.score + 1.0), r.informative};
}

double f_inlier(const FlowField& flow, const RansacConfig& cfg) {
  const auto corrs = flow_to_correspondences(flow, cfg.stride, cfg.max_count, cfg.seed);
  return ransac_rigidity(corrs, cfg, 1).inlier_fraction;
}

double f_precision(const FlowField& flow, const Box& box_in_crop) {
  std::size_t valid = 0, inside = 0;
  for (const FlowVector& f : flow.entries()) {
    if (!f.valid) continue;
    ++valid;
    if (box_in_crop.contains(f.u, f.v)) ++inside;
  }
  return valid == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(valid);
}

double f_recall(const FlowField& flow, const Box& box_in_crop) {
  Box tight{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (const FlowVector& f : flow.entries()) {
    if (!f.valid) continue;
    any = true;
    tight.x_min = std::min(tight.x_min, static_cast<double>(f.u));
    tight.y_min = std::min(tight.y_min, static_cast<double>(f.v));
    tight.x_max = std::max(tight.x_max, static_cast<double>(f.u));
    tight.y_max = std::max(tight.y_max, static_cast<double>(f.v));
  }
  return any ? iou(tight, box_in_crop) : 0.0;
}

}  // namespace verikit
