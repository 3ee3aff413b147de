#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "verikit/verify/tests.hpp"

namespace verikit {

/// Scores and pass flags of one (detection, template) pair. A per-template
/// score is empty when short-circuit evaluation skipped it; every present
/// flag equals (score > threshold).
struct TestScores {
  int template_index = 0;
  double sim_score = 0.0;
  std::optional<double> f_color;
  std::optional<double> f_inlier;
  std::optional<double> f_precision;
  std::optional<double> f_recall;
  bool sim_pass = false;
  bool color_pass = false;
  bool inlier_pass = false;
  bool precision_pass = false;
  bool recall_pass = false;
  bool ncc_informative = false;
  bool flow_missing = false;
  bool passed = false;  ///< every enabled test passed

  /// Product of the four per-template scores; 0 if any is missing.
  double score_product() const noexcept;
};

enum class ScoreMode {
  short_circuit,  ///< stop at the first failing test of a template
  full,           ///< compute every score for every template
};

struct VerifyOptions {
  Thresholds thresholds;
  RansacConfig ransac;
  TestSet enabled;
  ScoreMode mode = ScoreMode::short_circuit;
};

struct FlowVerifyResult {
  bool accepted = false;
  std::vector<TestScores> templates;
  std::optional<std::size_t> best_template;  ///< position in `templates`
  std::string reason;  ///< "accepted", "rejected", "missing-flow", "empty-crop", "no-templates"
};

/// One template of the proposed class with its flow into the crop; `flow`
/// may be null when the estimator produced nothing for this pair.
struct TemplateView {
  const Image* image = nullptr;
  const FlowField* flow = nullptr;
  int template_index = 0;
};

/// Seed for the RANSAC run of one (detection, template) pair.
std::uint64_t pair_seed(std::uint64_t base, std::int64_t detection_id, int template_index);

/// The five-test conjunction per template and the any-template disjunction.
/// Short-circuit order inside a template: sim, f_inlier, f_precision,
/// f_recall, f_color. Templates that pass get their remaining scores filled
/// in, so the best template (largest score product, lowest position on ties)
/// does not depend on the mode.
FlowVerifyResult flow_verify(const Detection& detection, std::span<const TemplateView> templates,
                             const Image& crop, std::span<const Detection> all_detections,
                             const VerifyOptions& options);

/// Re-derives flags and acceptance from full-mode scores under new
/// thresholds, with `sim` recomputed by the caller. Equals flow_verify in
/// full mode with the same thresholds.
FlowVerifyResult reapply_thresholds(const FlowVerifyResult& full_scores, double sim,
                                    const Thresholds& thresholds, const TestSet& enabled);

}  // namespace verikit
