#include "verikit/eval/eval.hpp"

#include <algorithm>
#include <set>

#include "verikit/util/error.hpp"

namespace verikit {

bool rank_before(const RankedDetection& a, const RankedDetection& b) noexcept {
  if (a.accepted != b.accepted) return a.accepted;
  if (a.detection.confidence != b.detection.confidence)
    return a.detection.confidence > b.detection.confidence;
  if (a.detection.detection_id != b.detection.detection_id)
    return a.detection.detection_id < b.detection.detection_id;
  return a.scene_id < b.scene_id;
}

std::vector<RankedDetection> rerank(std::vector<RankedDetection> items) {
  std::stable_sort(items.begin(), items.end(), rank_before);
  return items;
}

std::vector<RankedDetection> rerank(std::span<const Detection> detections,
                                    std::span<const bool> accepted) {
  if (detections.size() != accepted.size())
    throw ValidationError("acceptance flags do not line up with detections");
  std::vector<RankedDetection> items;
  for (std::size_t i = 0; i < detections.size(); ++i) items.push_back({0, detections[i], accepted[i]});
  return rerank(std::move(items));
}

std::vector<RankedDetection> base_ranking(std::vector<RankedDetection> items) {
  for (RankedDetection& r : items) r.accepted = true;
  return rerank(std::move(items));
}

std::vector<bool> match_detections(std::span<const RankedDetection> ranked,
                                   const GroundTruthByScene& ground_truth, int class_id,
                                   double iou_threshold) {
  std::vector<bool> out;
  std::set<std::pair<int, std::size_t>> used;
  for (const RankedDetection& r : ranked) {
    if (r.detection.class_id != class_id) continue;
    bool tp = false;
    const auto it = ground_truth.find(r.scene_id);
    if (it != ground_truth.end()) {
      double best = -1.0;
      std::size_t arg = 0;
      for (std::size_t g = 0; g < it->second.size(); ++g) {
        const GroundTruth& gt = it->second[g];
        if (gt.class_id != class_id || used.count({r.scene_id, g})) continue;
        const double v = iou(r.detection.box, gt.box);
        if (v > best) {
          best = v;
          arg = g;
        }
      }
      if (best >= iou_threshold) {
        used.insert({r.scene_id, arg});
        tp = true;
      }
    }
    out.push_back(tp);
  }
  return out;
}

namespace {

std::size_t count_ground_truth(const GroundTruthByScene& gt, int class_id) {
  std::size_t n = 0;
  for (const auto& [scene, boxes] : gt)
    for (const GroundTruth& g : boxes) n += g.class_id == class_id ? 1 : 0;
  return n;
}

// Envelope integral over the points of one ranking.
double envelope_ap(const std::vector<PrPoint>& points, const std::vector<bool>& tp) {
  double ap = 0.0, envelope = 0.0, prev_recall = 0.0;
  std::vector<double> env(points.size());
  for (std::size_t i = points.size(); i-- > 0;) {
    envelope = std::max(envelope, points[i].precision);
    env[i] = envelope;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!tp[i]) continue;
    ap += (points[i].recall - prev_recall) * env[i];
    prev_recall = points[i].recall;
  }
  return ap;
}

}  // namespace

std::optional<PrCurve> average_precision(std::span<const RankedDetection> ranked,
                                         const GroundTruthByScene& ground_truth, int class_id,
                                         double iou_threshold) {
  PrCurve curve;
  curve.class_id = class_id;
  curve.num_ground_truth = count_ground_truth(ground_truth, class_id);
  if (curve.num_ground_truth == 0) return std::nullopt;
  curve.true_positive = match_detections(ranked, ground_truth, class_id, iou_threshold);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < curve.true_positive.size(); ++i) {
    tp += curve.true_positive[i] ? 1 : 0;
    const PrPoint p{static_cast<double>(tp) / static_cast<double>(curve.num_ground_truth),
                    static_cast<double>(tp) / static_cast<double>(i + 1)};
    curve.points.push_back(p);
    curve.max_precision = std::max(curve.max_precision, p.precision);
  }
  curve.ap = envelope_ap(curve.points, curve.true_positive);
  return curve;
}

EvalSummary mean_ap(std::span<const RankedDetection> ranked, const GroundTruthByScene& ground_truth,
                    double iou_threshold) {
  EvalSummary out;
  out.num_detections = ranked.size();
  std::set<int> classes;
  for (const auto& [scene, boxes] : ground_truth)
    for (const GroundTruth& g : boxes) classes.insert(g.class_id);
  for (const RankedDetection& r : ranked) {
    classes.insert(r.detection.class_id);
    out.num_accepted += r.accepted ? 1 : 0;
  }

  // Per-class matching, then the flags are scattered back onto the pooled order.
  std::vector<bool> pooled_tp(ranked.size(), false);
  double ap_sum = 0.0;
  std::size_t ap_classes = 0;
  for (int c : classes) {
    ClassResult cr;
    cr.class_id = c;
    cr.num_ground_truth = count_ground_truth(ground_truth, c);
    const std::vector<bool> tp = match_detections(ranked, ground_truth, c, iou_threshold);
    std::size_t k = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (ranked[i].detection.class_id != c) continue;
      pooled_tp[i] = tp[k++];
    }
    cr.num_detections = tp.size();
    cr.true_positives = static_cast<std::size_t>(std::count(tp.begin(), tp.end(), true));
    if (auto curve = average_precision(ranked, ground_truth, c, iou_threshold)) {
      cr.ap = curve->ap;
      cr.max_precision = curve->max_precision;
      ap_sum += curve->ap;
      ++ap_classes;
    } else {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < tp.size(); ++i) {
        hits += tp[i] ? 1 : 0;
        cr.max_precision = std::max(cr.max_precision, static_cast<double>(hits) / static_cast<double>(i + 1));
      }
    }
    out.per_class.push_back(cr);
  }
  out.map = ap_classes == 0 ? 0.0 : ap_sum / static_cast<double>(ap_classes);

  std::size_t total_gt = 0;
  for (const auto& [scene, boxes] : ground_truth) total_gt += boxes.size();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    hits += pooled_tp[i] ? 1 : 0;
    const double precision = static_cast<double>(hits) / static_cast<double>(i + 1);
    out.max_precision = std::max(out.max_precision, precision);
    out.curve.push_back({total_gt == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total_gt),
                         precision});
  }
  return out;
}

}  // namespace verikit
