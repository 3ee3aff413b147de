#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "verikit/core/box.hpp"
#include "verikit/geometry/fundamental.hpp"

namespace verikit {

struct SiftThresholds {
  std::size_t s_matches_min = 30;
  double s_precision_min = 0.9;
};

struct SiftTemplateScore {
  std::size_t matches = 0;
  double precision = 0.0;  ///< fraction of match targets inside the box
  bool passed = false;
};

struct SiftResult {
  bool accepted = false;
  std::vector<SiftTemplateScore> templates;
  std::optional<std::size_t> best_template;  ///< passing template with the most matches
};

/// Sparse-keypoint verification: a template passes when it has more than
/// s_matches_min matches and more than s_precision_min of their targets lie
/// inside `box_in_crop`; the detection passes when any template does.
SiftResult sift_verify(std::span<const std::vector<Correspondence>> matches_per_template,
                       const Box& box_in_crop, const SiftThresholds& thresholds = {});

}  // namespace verikit
