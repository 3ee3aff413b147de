#include "verikit/verify/flow_verify.hpp"

#include "verikit/core/warp.hpp"
#include "verikit/util/error.hpp"
#include "verikit/util/rng.hpp"

namespace verikit {

double TestScores::score_product() const noexcept {
  if (!f_color || !f_inlier || !f_precision || !f_recall) return 0.0;
  return *f_color * *f_inlier * *f_precision * *f_recall;
}

std::uint64_t pair_seed(std::uint64_t base, std::int64_t detection_id, int template_index) {
  return derive_seed(base, {static_cast<std::uint64_t>(detection_id),
                            static_cast<std::uint64_t>(template_index)});
}

namespace {

// Per-template tests in short-circuit order.
constexpr std::array<VerifyTest, 4> kTemplateOrder = {VerifyTest::f_inlier, VerifyTest::f_precision,
                                                      VerifyTest::f_recall, VerifyTest::f_color};

struct PairContext {
  const Image* templ;
  const FlowField* flow;
  const Image* crop;
  Box box_in_crop;
  RansacConfig ransac;
};

bool has_score(const TestScores& s, VerifyTest t) {
  switch (t) {
    case VerifyTest::sim:
      return true;
    case VerifyTest::f_color:
      return s.f_color.has_value();
    case VerifyTest::f_inlier:
      return s.f_inlier.has_value();
    case VerifyTest::f_precision:
      return s.f_precision.has_value();
    case VerifyTest::f_recall:
      return s.f_recall.has_value();
  }
  return false;
}

void compute(TestScores& s, VerifyTest t, const PairContext& ctx, const Thresholds& th) {
  switch (t) {
    case VerifyTest::sim:
      break;
    case VerifyTest::f_color: {
      const ColorScore c = f_color(*ctx.templ, *ctx.flow, *ctx.crop);
      s.f_color = c.score;
      s.ncc_informative = c.ncc_informative;
      s.color_pass = c.score > th.alpha_color;
      break;
    }
    case VerifyTest::f_inlier:
      s.f_inlier = f_inlier(*ctx.flow, ctx.ransac);
      s.inlier_pass = *s.f_inlier > th.alpha_rig;
      break;
    case VerifyTest::f_precision:
      s.f_precision = f_precision(*ctx.flow, ctx.box_in_crop);
      s.precision_pass = *s.f_precision > th.alpha_prec;
      break;
    case VerifyTest::f_recall:
      s.f_recall = f_recall(*ctx.flow, ctx.box_in_crop);
      s.recall_pass = *s.f_recall > th.alpha_rec;
      break;
  }
}

bool flag(const TestScores& s, VerifyTest t) {
  switch (t) {
    case VerifyTest::sim:
      return s.sim_pass;
    case VerifyTest::f_color:
      return s.color_pass;
    case VerifyTest::f_inlier:
      return s.inlier_pass;
    case VerifyTest::f_precision:
      return s.precision_pass;
    case VerifyTest::f_recall:
      return s.recall_pass;
  }
  return false;
}

bool all_enabled_pass(const TestScores& s, const TestSet& enabled) {
  for (VerifyTest t : kAllTests)
    if (enabled.contains(t) && (!has_score(s, t) || !flag(s, t))) return false;
  return true;
}

void select_best(FlowVerifyResult& r) {
  r.best_template.reset();
  double best = -1.0;
  for (std::size_t k = 0; k < r.templates.size(); ++k) {
    if (!r.templates[k].passed) continue;
    const double p = r.templates[k].score_product();
    if (p > best) {
      best = p;
      r.best_template = k;
    }
  }
  r.accepted = r.best_template.has_value();
  r.reason = r.accepted ? "accepted" : "rejected";
}

}  // namespace

FlowVerifyResult flow_verify(const Detection& detection, std::span<const TemplateView> templates,
                             const Image& crop, std::span<const Detection> all_detections,
                             const VerifyOptions& options) {
  FlowVerifyResult result;
  const Thresholds& th = options.thresholds;
  const double sim = sim_score(detection, all_detections, th.eta_iou);
  const bool sim_pass = sim > th.eta_diff;

  bool missing = false;
  for (const TemplateView& view : templates) {
    TestScores s;
    s.template_index = view.template_index;
    s.sim_score = sim;
    s.sim_pass = sim_pass;
    s.flow_missing = view.flow == nullptr;
    missing = missing || s.flow_missing;
    result.templates.push_back(s);
  }
  if (templates.empty()) {
    result.reason = "no-templates";
    return result;
  }
  if (missing) {
    result.reason = "missing-flow";
    return result;
  }

  const Box box_in_crop = crop_window(detection.box).to_crop(detection.box);
  for (std::size_t k = 0; k < templates.size(); ++k) {
    const TemplateView& view = templates[k];
    if (view.image == nullptr) throw ValidationError("template view without an image");
    if (view.flow->width() != view.image->width() || view.flow->height() != view.image->height())
      throw ValidationError("flow for template " + std::to_string(view.template_index) +
                            " does not match template dimensions");
    PairContext ctx{view.image, view.flow, &crop, box_in_crop, options.ransac};
    ctx.ransac.seed = pair_seed(options.ransac.seed, detection.detection_id, view.template_index);

    TestScores& s = result.templates[k];
    if (options.mode == ScoreMode::full) {
      for (VerifyTest t : kTemplateOrder) compute(s, t, ctx, th);
    } else {
      bool alive = !options.enabled.contains(VerifyTest::sim) || sim_pass;
      for (VerifyTest t : kTemplateOrder) {
        if (!alive) break;
        if (!options.enabled.contains(t)) continue;
        compute(s, t, ctx, th);
        alive = flag(s, t);
      }
    }
    s.passed = all_enabled_pass(s, options.enabled);
    if (s.passed)
      for (VerifyTest t : kTemplateOrder)
        if (!has_score(s, t)) compute(s, t, ctx, th);
  }
  select_best(result);
  return result;
}

FlowVerifyResult reapply_thresholds(const FlowVerifyResult& full_scores, double sim,
                                    const Thresholds& th, const TestSet& enabled) {
  FlowVerifyResult r = full_scores;
  if (r.reason == "missing-flow" || r.reason == "no-templates" || r.reason == "empty-crop") {
    r.accepted = false;
    r.best_template.reset();
    return r;
  }
  for (TestScores& s : r.templates) {
    if (!s.f_color || !s.f_inlier || !s.f_precision || !s.f_recall)
      throw ValidationError("reapply_thresholds needs full-mode scores");
    s.sim_score = sim;
    s.sim_pass = sim > th.eta_diff;
    s.color_pass = *s.f_color > th.alpha_color;
    s.inlier_pass = *s.f_inlier > th.alpha_rig;
    s.precision_pass = *s.f_precision > th.alpha_prec;
    s.recall_pass = *s.f_recall > th.alpha_rec;
    s.passed = all_enabled_pass(s, enabled);
  }
  select_best(r);
  return r;
}

}  // namespace verikit
