#pragma once

#include <string>
#include <vector>

#include "verikit/eval/eval.hpp"
#include "verikit/verify/batch.hpp"

namespace verikit {

GroundTruthByScene ground_truth_of(const Suite& suite);

/// Ranked list from reports; with `gated` false every detection counts as
/// accepted, which is the base detector's ranking.
std::vector<RankedDetection> ranked_from_reports(const std::vector<DetectionReport>& reports,
                                                 bool gated);

struct PipelineResult {
  std::vector<DetectionReport> reports;
  EvalSummary base;
  EvalSummary verified;
};

PipelineResult evaluate_reports(const Suite& suite, std::vector<DetectionReport> reports);
PipelineResult run_pipeline(const Suite& suite, const BatchOptions& options, int jobs = 0);

struct SweepRow {
  std::size_t count = 0;
  double map = 0.0;
  double max_precision = 0.0;
  std::size_t accepted = 0;
  double seconds_per_detection = 0.0;  ///< informational
};

/// verify + rerank + eval with `count` equally spaced viewpoints per class.
std::vector<SweepRow> sweep_viewpoints(const Suite& suite, const std::vector<std::size_t>& counts,
                                       const VerifyOptions& options, int jobs = 0);

/// Candidate values per threshold; the grid is their Cartesian product.
struct ThresholdGrid {
  std::vector<double> alpha_rig = {0.9};
  std::vector<double> alpha_color = {0.5};
  std::vector<double> alpha_prec = {0.9};
  std::vector<double> alpha_rec = {0.3};
  std::vector<double> eta_diff = {0.0};
  std::vector<double> eta_iou = {0.5};

  std::size_t size() const noexcept;
  /// Every grid point in lexicographic order of (alpha_rig, ..., eta_iou)
  /// after sorting each axis.
  std::vector<Thresholds> points() const;
};

struct GridRow {
  Thresholds thresholds;
  double map = 0.0;
  double max_precision = 0.0;
};

struct GridResult {
  Thresholds best;
  double map = 0.0;
  double max_precision = 0.0;
  std::vector<GridRow> rows;
};

/// Exhaustive search for the mAP-maximizing thresholds; ties go to higher max
/// precision, then to the lexicographically smallest threshold vector.
/// Scores are computed once and re-thresholded per grid point. Throws
/// ValidationError on an empty grid.
GridResult grid_search(const Suite& suite, const ThresholdGrid& grid, const VerifyOptions& options,
                       int jobs = 0);

struct AblationRow {
  std::string removed;  ///< "none" for the full test set
  double map = 0.0;
  double max_precision = 0.0;
  std::size_t accepted = 0;
};

/// The full test set, then each test removed on its own.
std::vector<AblationRow> ablation(const Suite& suite, const VerifyOptions& options, int jobs = 0);

}  // namespace verikit
