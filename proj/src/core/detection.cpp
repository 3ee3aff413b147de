#include "verikit/core/detection.hpp"

#include <set>
#include <string>

#include "verikit/util/error.hpp"

namespace verikit {

TemplateSet TemplateSet::subset(const std::vector<std::size_t>& indices) const {
  TemplateSet out;
  out.class_id = class_id;
  for (std::size_t i : indices) {
    if (i >= templates.size())
      throw ValidationError("template index " + std::to_string(i) + " out of range for class " +
                            std::to_string(class_id));
    out.templates.push_back(templates[i]);
    if (!masks.empty()) out.masks.push_back(masks[i]);
  }
  return out;
}

const FlowField* SceneRecord::flow(std::int64_t detection_id, int class_id,
                                   int template_index) const {
  const auto it = flows.find(FlowKey{detection_id, class_id, template_index});
  return it == flows.end() ? nullptr : &it->second;
}

void validate_detection(const Detection& d) {
  if (!d.box.valid())
    throw ValidationError("detection " + std::to_string(d.detection_id) + " has an invalid box");
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
    throw ValidationError("detection " + std::to_string(d.detection_id) +
                          " confidence outside [0,1]");
}

void validate_scene(const SceneRecord& scene, const std::vector<TemplateSet>& templates) {
  std::set<std::int64_t> ids;
  for (const Detection& d : scene.detections) {
    validate_detection(d);
    if (!ids.insert(d.detection_id).second)
      throw ValidationError("duplicate detection_id " + std::to_string(d.detection_id));
  }
  for (const auto& [key, flow] : scene.flows) {
    if (!ids.count(key.detection_id))
      throw ValidationError("flow references unknown detection " +
                            std::to_string(key.detection_id));
    const TemplateSet* set = find_templates(templates, key.class_id);
    if (set == nullptr || key.template_index < 0 ||
        static_cast<std::size_t>(key.template_index) >= set->templates.size())
      throw ValidationError("flow references unknown template " + std::to_string(key.class_id) +
                            "/" + std::to_string(key.template_index));
    const Image& t = set->templates[static_cast<std::size_t>(key.template_index)];
    if (flow.width() != t.width() || flow.height() != t.height())
      throw ValidationError("flow for detection " + std::to_string(key.detection_id) +
                            " does not match template dimensions");
  }
}

const TemplateSet* find_templates(const std::vector<TemplateSet>& sets, int class_id) noexcept {
  for (const TemplateSet& s : sets)
    if (s.class_id == class_id) return &s;
  return nullptr;
}

}  // namespace verikit
