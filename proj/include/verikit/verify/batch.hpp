#pragma once

#include <cstddef>
#include <vector>

#include "verikit/core/detection.hpp"
#include "verikit/verify/flow_verify.hpp"

namespace verikit {

/// Scenes with their detections and flows, plus the template sets they refer to.
struct Suite {
  std::vector<SceneRecord> scenes;
  std::vector<TemplateSet> templates;

  std::size_t detection_count() const noexcept;
};

struct DetectionReport {
  int scene_id = 0;
  Detection detection;
  FlowVerifyResult result;
};

/// Template positions {floor(j * available / count) : j < count}; count must
/// lie in [1, available].
std::vector<std::size_t> equally_spaced(std::size_t available, std::size_t count);

struct BatchOptions {
  VerifyOptions verify;
  std::size_t viewpoints = 0;  ///< templates per class, equally spaced; 0 uses all
};

/// Runs flow_verify on every detection, in scene order then detection order.
/// Detections are processed in parallel; the output does not depend on `jobs`.
std::vector<DetectionReport> verify_suite(const Suite& suite, const BatchOptions& options,
                                          int jobs = 0);

/// Single-threaded reference implementation of verify_suite.
std::vector<DetectionReport> verify_suite_serial(const Suite& suite, const BatchOptions& options);

/// Recomputes sim scores and pass flags of full-mode reports under new
/// thresholds and test set.
std::vector<DetectionReport> reapply_reports(const Suite& suite,
                                             const std::vector<DetectionReport>& full_reports,
                                             const Thresholds& thresholds, const TestSet& enabled);

/// Number of reports rejected because a flow was missing.
std::size_t missing_flow_count(const std::vector<DetectionReport>& reports) noexcept;

}  // namespace verikit
