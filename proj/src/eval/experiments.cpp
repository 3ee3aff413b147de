#include "verikit/eval/experiments.hpp"

#include <algorithm>
#include <chrono>

#include "verikit/util/error.hpp"

namespace verikit {

GroundTruthByScene ground_truth_of(const Suite& suite) {
  GroundTruthByScene out;
  for (const SceneRecord& s : suite.scenes) out[s.scene_id] = s.ground_truth;
  return out;
}

std::vector<RankedDetection> ranked_from_reports(const std::vector<DetectionReport>& reports,
                                                 bool gated) {
  std::vector<RankedDetection> items;
  items.reserve(reports.size());
  for (const DetectionReport& r : reports)
    items.push_back({r.scene_id, r.detection, gated ? r.result.accepted : true});
  return rerank(std::move(items));
}

PipelineResult evaluate_reports(const Suite& suite, std::vector<DetectionReport> reports) {
  PipelineResult out;
  const GroundTruthByScene gt = ground_truth_of(suite);
  out.base = mean_ap(ranked_from_reports(reports, false), gt);
  out.verified = mean_ap(ranked_from_reports(reports, true), gt);
  out.reports = std::move(reports);
  return out;
}

PipelineResult run_pipeline(const Suite& suite, const BatchOptions& options, int jobs) {
  return evaluate_reports(suite, verify_suite(suite, options, jobs));
}

std::vector<SweepRow> sweep_viewpoints(const Suite& suite, const std::vector<std::size_t>& counts,
                                       const VerifyOptions& options, int jobs) {
  std::vector<SweepRow> rows;
  const std::size_t detections = std::max<std::size_t>(1, suite.detection_count());
  for (std::size_t count : counts) {
    for (const TemplateSet& set : suite.templates)
      if (count < 1 || count > set.templates.size())
        throw ValidationError("viewpoint count " + std::to_string(count) + " exceeds the " +
                              std::to_string(set.templates.size()) + " templates of class " +
                              std::to_string(set.class_id));
    BatchOptions b{options, count};
    const auto start = std::chrono::steady_clock::now();
    const PipelineResult r = run_pipeline(suite, b, jobs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    SweepRow row;
    row.count = count;
    row.map = r.verified.map;
    row.max_precision = r.verified.max_precision;
    row.accepted = r.verified.num_accepted;
    row.seconds_per_detection = secs / static_cast<double>(detections);
    rows.push_back(row);
  }
  return rows;
}

std::size_t ThresholdGrid::size() const noexcept {
  return alpha_rig.size() * alpha_color.size() * alpha_prec.size() * alpha_rec.size() *
         eta_diff.size() * eta_iou.size();
}

std::vector<Thresholds> ThresholdGrid::points() const {
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto a = sorted(alpha_rig), b = sorted(alpha_color), c = sorted(alpha_prec),
             d = sorted(alpha_rec), e = sorted(eta_diff), f = sorted(eta_iou);
  std::vector<Thresholds> out;
  for (double va : a)
    for (double vb : b)
      for (double vc : c)
        for (double vd : d)
          for (double ve : e)
            for (double vf : f) out.push_back({va, vb, vc, vd, ve, vf});
  return out;
}

GridResult grid_search(const Suite& suite, const ThresholdGrid& grid, const VerifyOptions& options,
                       int jobs) {
  const std::vector<Thresholds> points = grid.points();
  if (points.empty()) throw ValidationError("empty threshold grid");
  for (const Thresholds& t : points) t.validate();
  BatchOptions full{options, 0};
  full.verify.mode = ScoreMode::full;
  const std::vector<DetectionReport> scored = verify_suite(suite, full, jobs);
  const GroundTruthByScene gt = ground_truth_of(suite);

  GridResult out;
  bool have = false;
  for (const Thresholds& t : points) {
    const auto reports = reapply_reports(suite, scored, t, options.enabled);
    const EvalSummary s = mean_ap(ranked_from_reports(reports, true), gt);
    out.rows.push_back({t, s.map, s.max_precision});
    // Points arrive in lexicographic order, so keeping the first of equals
    // implements the final tie-break.
    if (!have || s.map > out.map || (s.map == out.map && s.max_precision > out.max_precision)) {
      out.best = t;
      out.map = s.map;
      out.max_precision = s.max_precision;
      have = true;
    }
  }
  return out;
}

std::vector<AblationRow> ablation(const Suite& suite, const VerifyOptions& options, int jobs) {
  BatchOptions full{options, 0};
  full.verify.mode = ScoreMode::full;
  const std::vector<DetectionReport> scored = verify_suite(suite, full, jobs);
  const GroundTruthByScene gt = ground_truth_of(suite);
  std::vector<AblationRow> rows;
  auto run = [&](const std::string& name, const TestSet& enabled) {
    const auto reports = reapply_reports(suite, scored, options.thresholds, enabled);
    const EvalSummary s = mean_ap(ranked_from_reports(reports, true), gt);
    rows.push_back({name, s.map, s.max_precision, s.num_accepted});
  };
  run("none", options.enabled);
  for (VerifyTest t : kAllTests)
    if (options.enabled.contains(t)) run(test_name(t), options.enabled.without(t));
  return rows;
}

}  // namespace verikit
