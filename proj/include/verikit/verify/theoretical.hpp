#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "verikit/core/detection.hpp"
#include "verikit/core/flow.hpp"
#include "verikit/core/image.hpp"
#include "verikit/metrics/metrics.hpp"

namespace verikit {

struct TheoreticalConfig {
  double gamma = 0.02;  ///< bound on d(T(template), crop)
  double delta = 0.04;  ///< classifier margin
  DistanceMetric metric = DistanceMetric::l_inf();
  double rigidity_epsilon = 1.0;  ///< pixels
  int rigidity_iterations = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TemplateRef {
  int class_id = 0;
  int template_index = 0;
};

/// c(template, crop) in [0,1].
using SimilarityClassifier =
    std::function<double(const Image& templ, const TemplateRef& ref, const Image& crop)>;

/// Flow from a template into the crop; nullopt when the estimator gives up.
using FlowEstimator = std::function<std::optional<FlowField>(const Image& templ,
                                                             const TemplateRef& ref,
                                                             const Image& crop)>;

enum class MatchStage {
  similar_object,  ///< another class scores within delta
  color,           ///< d(T(template), crop) > gamma, or no flow
  rigidity,        ///< flow not fully consistent with one fundamental matrix
  passed,
};

const char* stage_name(MatchStage s) noexcept;

struct MatchOutcome {
  TemplateRef ref;
  MatchStage stage = MatchStage::similar_object;
  double classifier_score = 0.0;
  double best_other_score = 0.0;  ///< max classifier score over other classes
  std::optional<double> distance;
  std::optional<double> rigidity;
};

struct TheoreticalResult {
  bool accepted = false;
  std::vector<MatchOutcome> matches;  ///< templates tried, in order, up to the first pass
};

/// Three-stage verification of `crop` against every template of `class_id`;
/// accepts on the first template passing the similar-object, color and
/// rigidity checks. Rigidity uses every valid flow entry and requires an
/// inlier fraction of 1 (to within 1e-9).
TheoreticalResult theoretical_flow_verify_detailed(int class_id, const Image& crop,
                                                   std::span<const TemplateSet> dataset,
                                                   const SimilarityClassifier& classifier,
                                                   const FlowEstimator& estimator,
                                                   const TheoreticalConfig& cfg);

bool theoretical_flow_verify(int class_id, const Image& crop, std::span<const TemplateSet> dataset,
                             const SimilarityClassifier& classifier,
                             const FlowEstimator& estimator, const TheoreticalConfig& cfg);

}  // namespace verikit
