#pragma once

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "verikit/core/box.hpp"
#include "verikit/core/flow.hpp"
#include "verikit/core/image.hpp"

namespace verikit {

struct Detection {
  std::int64_t detection_id = 0;
  int class_id = 0;
  Box box;
  double confidence = 0.0;  ///< base-detector score c(D) in [0,1]

  bool operator==(const Detection&) const = default;
};

struct GroundTruth {
  Box box;
  int class_id = 0;

  bool operator==(const GroundTruth&) const = default;
};

/// Template viewpoints of one object class, with optional foreground masks.
struct TemplateSet {
  int class_id = 0;
  std::vector<Image> templates;
  std::vector<Mask> masks;  ///< empty, or one mask per template

  const Mask* mask(std::size_t index) const noexcept {
    return index < masks.size() && !masks[index].empty() ? &masks[index] : nullptr;
  }
  /// Copy holding only the templates at `indices`, in that order.
  TemplateSet subset(const std::vector<std::size_t>& indices) const;
};

struct FlowKey {
  std::int64_t detection_id = 0;
  int class_id = 0;
  int template_index = 0;

  auto operator<=>(const FlowKey&) const = default;
};

/// Unit of evaluation: one scene with annotations, detections, and the flows
/// from each detection's proposed-class templates into its crop.
struct SceneRecord {
  int scene_id = 0;
  Image scene;
  std::vector<GroundTruth> ground_truth;
  std::vector<Detection> detections;
  std::map<FlowKey, FlowField> flows;

  const FlowField* flow(std::int64_t detection_id, int class_id, int template_index) const;
};

void validate_detection(const Detection& d);

/// Checks that every flow key references an existing detection and template.
void validate_scene(const SceneRecord& scene, const std::vector<TemplateSet>& templates);

/// Looks up a class's template set; nullptr when absent.
const TemplateSet* find_templates(const std::vector<TemplateSet>& sets, int class_id) noexcept;

}  // namespace verikit
