#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "verikit/synth/assumption.hpp"
#include "verikit/verify/theoretical.hpp"

namespace verikit {

/// How VerifyMatch obtains a flow during theorem trials.
enum class EstimatorKind {
  ground_truth,  ///< best symmetry of the template against the crop
  random,        ///< uniform random targets inside the crop
  adversarial,   ///< the query's true rigid map, whatever the template
};

std::string estimator_name(EstimatorKind k);
EstimatorKind parse_estimator(const std::string& name);

struct TheoremSpec {
  AssumptionDatasetSpec dataset;
  std::size_t trials = 1000;  ///< wrong-class queries, split across datasets
  std::size_t datasets = 10;
  std::vector<EstimatorKind> estimators = {EstimatorKind::ground_truth, EstimatorKind::random,
                                           EstimatorKind::adversarial};
  DistanceMetric metric = DistanceMetric::l_inf();
  std::optional<double> delta;  ///< defaults to the dataset's smoothness margin
  double rigidity_epsilon = 1.0;
  int rigidity_iterations = 100;
  std::size_t smoothness_samples = 10000;  ///< split across datasets
  std::size_t metric_samples = 200;        ///< per dataset
  std::uint64_t seed = 0;

  void validate() const;
};

struct StageCounts {
  std::size_t similar_object = 0;
  std::size_t color = 0;
  std::size_t rigidity = 0;
};

struct EstimatorArm {
  EstimatorKind estimator = EstimatorKind::ground_truth;
  std::size_t wrong_class_queries = 0;
  std::size_t false_positives = 0;
  std::size_t correct_class_queries = 0;
  std::size_t correct_accepted = 0;
  StageCounts wrong_class_rejections;   ///< stage that rejected the last template tried
  StageCounts correct_class_rejections;

  double recall() const noexcept {
    return correct_class_queries == 0
               ? 0.0
               : static_cast<double>(correct_accepted) / static_cast<double>(correct_class_queries);
  }
};

struct TheoremAudits {
  std::size_t dense_queries = 0;
  std::size_t dense_violations = 0;
  double dense_worst_distance = 0.0;
  AuditResult smoothness;
  MetricAudit metric;
  bool passed() const noexcept {
    return dense_violations == 0 && smoothness.passed() && metric.passed();
  }
};

struct TheoremReport {
  double gamma = 0.0;
  double delta = 0.0;
  double lipschitz = 0.0;
  std::string metric;
  std::size_t datasets = 0;
  TheoremAudits audits;
  bool premises_ok = false;
  std::vector<EstimatorArm> arms;  ///< empty when the premises failed
};

/// Builds audited datasets and runs wrong-class and correct-class queries
/// through theoretical_flow_verify for each estimator. When any audit fails
/// no trial runs and premises_ok is false. Trials run in parallel; the
/// report does not depend on `jobs`.
TheoremReport run_theorem(const TheoremSpec& spec, int jobs = 0);

/// Single-threaded reference implementation of run_theorem.
TheoremReport run_theorem_serial(const TheoremSpec& spec);

}  // namespace verikit
