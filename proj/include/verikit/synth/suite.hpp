#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "verikit/verify/batch.hpp"

namespace verikit {

struct SuiteSpec {
  int num_scenes = 8;
  int objects_per_scene = 6;
  double false_positive_rate = 0.5;  ///< fraction of emitted detections that are false
  int num_classes = 5;
  int templates_per_class = 15;  ///< viewpoints: template m is rotated by 2 pi m / M
  int template_size = 32;
  int scene_size = 256;
  int grid = 4;  ///< objects occupy distinct cells of a grid x grid layout
  double corner_jitter = 0.1;
  double box_jitter = 0.03;        ///< true-positive box edge noise, fraction of size
  double matcher_reach = 0.785398163397448;  ///< radians; farther viewpoints get no oracle flow
  int greedy_candidates = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class DetectionKind { true_positive, wrong_class, background, mislocalized };

std::string detection_kind_name(DetectionKind k);

struct GeneratedSuite {
  Suite suite;
  std::map<std::int64_t, DetectionKind> kinds;
};

/// Synthetic scenes of rotated, projectively warped, relit textured disks on a
/// textured background, with true detections (jittered boxes, oracle flows
/// from viewpoints within reach) and injected false ones: wrong labels on real
/// objects, boxes on empty cells, and boxes shifted off a real object. Flows
/// with no geometric relation to the crop are color-greedy: each template
/// pixel goes to the best-colored of a few random pixels inside the box.
GeneratedSuite make_detection_suite(const SuiteSpec& spec);

}  // namespace verikit
