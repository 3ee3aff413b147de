#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "verikit/core/detection.hpp"

namespace verikit {

struct RankedDetection {
  int scene_id = 0;
  Detection detection;
  bool accepted = false;
};

/// Orders accepted before rejected, then by confidence descending, then by
/// lower detection_id, then by lower scene_id.
bool rank_before(const RankedDetection& a, const RankedDetection& b) noexcept;

std::vector<RankedDetection> rerank(std::vector<RankedDetection> items);
/// Single-scene form: flags aligned with detections.
std::vector<RankedDetection> rerank(std::span<const Detection> detections,
                                    std::span<const bool> accepted);
/// Ranking by confidence alone (every detection treated as accepted).
std::vector<RankedDetection> base_ranking(std::vector<RankedDetection> items);

using GroundTruthByScene = std::map<int, std::vector<GroundTruth>>;

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  int class_id = 0;
  std::vector<PrPoint> points;  ///< one per ranked detection of the class
  std::vector<bool> true_positive;
  std::size_t num_ground_truth = 0;
  double ap = 0.0;
  double max_precision = 0.0;
};

/// Greedy matching of one class down the ranking: each detection takes the
/// unmatched same-class ground truth of its scene with the highest IoU
/// (lowest index on ties) if that IoU reaches `iou_threshold`.
std::vector<bool> match_detections(std::span<const RankedDetection> ranked,
                                   const GroundTruthByScene& ground_truth, int class_id,
                                   double iou_threshold = 0.5);

/// All-points average precision (area under the precision envelope) for one
/// class; nullopt when the class has no ground truth.
std::optional<PrCurve> average_precision(std::span<const RankedDetection> ranked,
                                         const GroundTruthByScene& ground_truth, int class_id,
                                         double iou_threshold = 0.5);

struct ClassResult {
  int class_id = 0;
  std::optional<double> ap;  ///< absent when the class has no ground truth
  double max_precision = 0.0;
  std::size_t num_ground_truth = 0;
  std::size_t num_detections = 0;
  std::size_t true_positives = 0;
};

struct EvalSummary {
  double map = 0.0;
  double max_precision = 0.0;  ///< over every prefix of the pooled ranking
  std::vector<ClassResult> per_class;
  std::vector<PrPoint> curve;  ///< pooled PR curve over all classes
  std::size_t num_detections = 0;
  std::size_t num_accepted = 0;
};

/// Pools every scene's detections into one ranking; AP per class over the
/// pooled list, mAP over classes with ground truth.
EvalSummary mean_ap(std::span<const RankedDetection> ranked, const GroundTruthByScene& ground_truth,
                    double iou_threshold = 0.5);

}  // namespace verikit
