#include "verikit/verify/theoretical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "verikit/core/warp.hpp"
#include "verikit/geometry/ransac.hpp"
#include "verikit/util/error.hpp"
#include "verikit/util/rng.hpp"

namespace verikit {

void TheoreticalConfig::validate() const {
  if (!(gamma >= 0.0)) throw ValidationError("gamma must be >= 0");
  if (!(delta >= 0.0)) throw ValidationError("delta must be >= 0");
  if (!(rigidity_epsilon >= 0.0)) throw ValidationError("rigidity_epsilon must be >= 0");
  if (rigidity_iterations < 1) throw ValidationError("rigidity_iterations must be >= 1");
}

const char* stage_name(MatchStage s) noexcept {
  switch (s) {
    case MatchStage::similar_object:
      return "similar_object";
    case MatchStage::color:
      return "color";
    case MatchStage::rigidity:
      return "rigidity";
    case MatchStage::passed:
      return "passed";
  }
  return "unknown";
}

namespace {

constexpr double kFullRigidity = 1.0 - 1e-9;

}  // namespace

TheoreticalResult theoretical_flow_verify_detailed(int class_id, const Image& crop,
                                                   std::span<const TemplateSet> dataset,
                                                   const SimilarityClassifier& classifier,
                                                   const FlowEstimator& estimator,
                                                   const TheoreticalConfig& cfg) {
  cfg.validate();
  const TemplateSet* own = nullptr;
  for (const TemplateSet& set : dataset)
    if (set.class_id == class_id) own = &set;
  if (own == nullptr || own->templates.empty())
    throw ValidationError("no templates for class " + std::to_string(class_id));

  // Only the largest other-class score matters for the similar-object check.
  double best_other = -std::numeric_limits<double>::infinity();
  for (const TemplateSet& set : dataset) {
    if (set.class_id == class_id) continue;
    for (std::size_t n = 0; n < set.templates.size(); ++n)
      best_other = std::max(best_other, classifier(set.templates[n],
                                                   {set.class_id, static_cast<int>(n)}, crop));
  }

  TheoreticalResult result;
  for (std::size_t m = 0; m < own->templates.size(); ++m) {
    const Image& templ = own->templates[m];
    MatchOutcome out;
    out.ref = {class_id, static_cast<int>(m)};
    out.classifier_score = classifier(templ, out.ref, crop);
    out.best_other_score = best_other;
    if (out.classifier_score < best_other + cfg.delta) {
      out.stage = MatchStage::similar_object;
      result.matches.push_back(out);
      continue;
    }

    const std::optional<FlowField> flow = estimator(templ, out.ref, crop);
    if (!flow) {
      out.stage = MatchStage::color;
      result.matches.push_back(out);
      continue;
    }
    if (flow->width() != templ.width() || flow->height() != templ.height())
      throw ValidationError("estimated flow does not match template dimensions");
    const Image warped = apply_flow(templ, *flow, crop.width(), crop.height());
    out.distance = image_distance(cfg.metric, warped, crop);
    if (*out.distance > cfg.gamma) {
      out.stage = MatchStage::color;
      result.matches.push_back(out);
      continue;
    }

    const auto corrs = flow_to_correspondences(*flow, 1, kNoCorrespondenceCap, 0);
    RansacConfig rc;
    rc.iterations = cfg.rigidity_iterations;
    rc.epsilon = cfg.rigidity_epsilon;
    rc.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(class_id), m});
    rc.max_count = kNoCorrespondenceCap;
    out.rigidity = ransac_rigidity(corrs, rc, 1).inlier_fraction;
    if (*out.rigidity < kFullRigidity) {
      out.stage = MatchStage::rigidity;
      result.matches.push_back(out);
      continue;
    }

    out.stage = MatchStage::passed;
    result.matches.push_back(out);
    result.accepted = true;
    return result;
  }
  return result;
}

bool theoretical_flow_verify(int class_id, const Image& crop, std::span<const TemplateSet> dataset,
                             const SimilarityClassifier& classifier,
                             const FlowEstimator& estimator, const TheoreticalConfig& cfg) {
  return theoretical_flow_verify_detailed(class_id, crop, dataset, classifier, estimator, cfg)
      .accepted;
}

}  // namespace verikit
