#include "verikit/verify/batch.hpp"

#include <omp.h>

#include <exception>

#include "verikit/core/warp.hpp"
#include "verikit/util/error.hpp"
#include "verikit/util/parallel.hpp"

namespace verikit {

std::size_t Suite::detection_count() const noexcept {
  std::size_t n = 0;
  for (const SceneRecord& s : scenes) n += s.detections.size();
  return n;
}

std::vector<std::size_t> equally_spaced(std::size_t available, std::size_t count) {
  if (count < 1 || count > available)
    throw ValidationError("viewpoint count " + std::to_string(count) + " outside [1, " +
                          std::to_string(available) + "]");
  std::vector<std::size_t> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = j * available / count;
  return out;
}

namespace {

struct WorkItem {
  std::size_t scene;
  std::size_t detection;
};

std::vector<WorkItem> work_items(const Suite& suite) {
  std::vector<WorkItem> items;
  items.reserve(suite.detection_count());
  for (std::size_t s = 0; s < suite.scenes.size(); ++s)
    for (std::size_t d = 0; d < suite.scenes[s].detections.size(); ++d) items.push_back({s, d});
  return items;
}

DetectionReport verify_one(const Suite& suite, const WorkItem& item, const BatchOptions& options) {
  const SceneRecord& scene = suite.scenes[item.scene];
  const Detection& det = scene.detections[item.detection];
  DetectionReport report{scene.scene_id, det, {}};

  const TemplateSet* set = find_templates(suite.templates, det.class_id);
  if (set == nullptr || set->templates.empty()) {
    report.result.reason = "no-templates";
    return report;
  }
  std::vector<std::size_t> positions;
  if (options.viewpoints == 0) {
    for (std::size_t i = 0; i < set->templates.size(); ++i) positions.push_back(i);
  } else {
    positions = equally_spaced(set->templates.size(), options.viewpoints);
  }
  std::vector<TemplateView> views;
  views.reserve(positions.size());
  for (std::size_t p : positions)
    views.push_back({&set->templates[p], scene.flow(det.detection_id, det.class_id, static_cast<int>(p)),
                     static_cast<int>(p)});

  Image crop;
  try {
    crop = crop_to_square(scene.scene, det.box);
  } catch (const ValidationError&) {
    report.result.reason = "empty-crop";
    for (const TemplateView& v : views) {
      TestScores s;
      s.template_index = v.template_index;
      s.flow_missing = v.flow == nullptr;
      report.result.templates.push_back(s);
    }
    return report;
  }
  report.result = flow_verify(det, views, crop, scene.detections, options.verify);
  return report;
}

}  // namespace

std::vector<DetectionReport> verify_suite_serial(const Suite& suite, const BatchOptions& options) {
  options.verify.thresholds.validate();
  options.verify.ransac.validate();
  std::vector<DetectionReport> out;
  for (const WorkItem& item : work_items(suite)) out.push_back(verify_one(suite, item, options));
  return out;
}

std::vector<DetectionReport> verify_suite(const Suite& suite, const BatchOptions& options,
                                          int jobs) {
  const int threads = resolve_jobs(jobs);
  if (threads == 1 || omp_in_parallel()) return verify_suite_serial(suite, options);
  options.verify.thresholds.validate();
  options.verify.ransac.validate();
  const std::vector<WorkItem> items = work_items(suite);
  std::vector<DetectionReport> out(items.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(items.size()); ++i) {
    try {
      out[static_cast<std::size_t>(i)] = verify_one(suite, items[static_cast<std::size_t>(i)], options);
    } catch (...) {
#pragma omp critical(verikit_batch_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<DetectionReport> reapply_reports(const Suite& suite,
                                             const std::vector<DetectionReport>& full_reports,
                                             const Thresholds& thresholds,
                                             const TestSet& enabled) {
  thresholds.validate();
  std::vector<DetectionReport> out;
  out.reserve(full_reports.size());
  std::size_t k = 0;
  for (const SceneRecord& scene : suite.scenes) {
    for (const Detection& det : scene.detections) {
      if (k >= full_reports.size() || full_reports[k].detection.detection_id != det.detection_id)
        throw ValidationError("reports do not line up with the suite");
      const double sim = sim_score(det, scene.detections, thresholds.eta_iou);
      out.push_back({scene.scene_id, det,
                     reapply_thresholds(full_reports[k].result, sim, thresholds, enabled)});
      ++k;
    }
  }
  if (k != full_reports.size()) throw ValidationError("reports do not line up with the suite");
  return out;
}

std::size_t missing_flow_count(const std::vector<DetectionReport>& reports) noexcept {
  std::size_t n = 0;
  for (const DetectionReport& r : reports) n += r.result.reason == "missing-flow" ? 1 : 0;
  return n;
}

}  // namespace verikit
