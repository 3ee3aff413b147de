#include "verikit/synth/theorem.hpp"

#include <omp.h>

#include <cctype>
#include <exception>
#include <map>

#include "verikit/util/error.hpp"
#include "verikit/util/parallel.hpp"
#include "verikit/util/rng.hpp"

namespace verikit {

std::string estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::ground_truth:
      return "ground_truth";
    case EstimatorKind::random:
      return "random";
    case EstimatorKind::adversarial:
      return "adversarial";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  std::string key;
  for (char c : name)
    if (c != '_' && c != '-') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "groundtruth" || key == "gt") return EstimatorKind::ground_truth;
  if (key == "random" || key == "uniform" || key == "uniformrandom") return EstimatorKind::random;
  if (key == "adversarial" || key == "adv") return EstimatorKind::adversarial;
  throw ValidationError("unknown flow estimator '" + name + "'");
}

void TheoremSpec::validate() const {
  dataset.validate();
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (datasets < 1 || datasets > trials) throw ValidationError("datasets must lie in [1, trials]");
  if (estimators.empty()) throw ValidationError("at least one estimator is required");
  if (delta && !(*delta >= 0.0)) throw ValidationError("delta must be >= 0");
  if (!(rigidity_epsilon >= 0.0)) throw ValidationError("rigidity_epsilon must be >= 0");
  if (rigidity_iterations < 1) throw ValidationError("rigidity_iterations must be >= 1");
}

namespace {

struct TrialOutcome {
  bool dense_ok = true;
  double dense_distance = 0.0;
  // Per estimator: (wrong accepted, wrong stage, correct accepted, correct stage)
  std::vector<std::array<int, 4>> arms;
};

int stage_code(const TheoreticalResult& r) {
  if (r.accepted || r.matches.empty()) return -1;
  return static_cast<int>(r.matches.back().stage);
}

FlowField random_flow(int side, std::uint64_t seed) {
  Rng rng(seed);
  FlowField f(side, side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) f.set(x, y, rng.uniform(0.0, side - 1.0), rng.uniform(0.0, side - 1.0));
  return f;
}

TrialOutcome run_trial(const AssumptionDataset& data, const TheoremSpec& spec,
                       const TheoreticalConfig& cfg, std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  const int k = data.spec().num_classes;
  const int true_class = static_cast<int>(rng.index(static_cast<std::uint64_t>(k)));
  int wrong_class = static_cast<int>(rng.index(static_cast<std::uint64_t>(k - 1)));
  if (wrong_class >= true_class) ++wrong_class;
  const AssumptionQuery query = data.make_query(true_class, rng.next());
  const std::uint64_t flow_seed = rng.next();

  TrialOutcome out;
  out.dense_ok = audit_dense_dataset(data, query, spec.metric, &out.dense_distance);
  if (!out.dense_ok) return out;

  // Classifier values depend only on the template, so one cache serves every call.
  std::map<const Image*, double> cache;
  const SimilarityClassifier classifier = [&](const Image& t, const TemplateRef&, const Image& crop) {
    auto it = cache.find(&t);
    if (it != cache.end()) return it->second;
    const double v = data.classify(t, crop);
    cache.emplace(&t, v);
    return v;
  };
  const SquareSymmetries& family = data.symmetries();
  const std::span<const TemplateSet> sets = data.templates();

  for (EstimatorKind kind : spec.estimators) {
    FlowEstimator estimator;
    switch (kind) {
      case EstimatorKind::ground_truth:
        estimator = [&](const Image& t, const TemplateRef&, const Image& crop) -> std::optional<FlowField> {
          return family.flow(data.best_symmetry(t, crop));
        };
        break;
      case EstimatorKind::random:
        estimator = [&](const Image& t, const TemplateRef& ref, const Image&) -> std::optional<FlowField> {
          return random_flow(t.width(), derive_seed(flow_seed, {static_cast<std::uint64_t>(ref.class_id),
                                                                static_cast<std::uint64_t>(ref.template_index)}));
        };
        break;
      case EstimatorKind::adversarial:
        estimator = [&](const Image&, const TemplateRef&, const Image&) -> std::optional<FlowField> {
          return query.flow;
        };
        break;
    }
    const TheoreticalResult wrong =
        theoretical_flow_verify_detailed(wrong_class, query.crop, sets, classifier, estimator, cfg);
    const TheoreticalResult right =
        theoretical_flow_verify_detailed(true_class, query.crop, sets, classifier, estimator, cfg);
    out.arms.push_back({wrong.accepted ? 1 : 0, stage_code(wrong), right.accepted ? 1 : 0, stage_code(right)});
  }
  return out;
}

void add_stage(StageCounts& c, int code) {
  switch (code) {
    case static_cast<int>(MatchStage::similar_object):
      ++c.similar_object;
      break;
    case static_cast<int>(MatchStage::color):
      ++c.color;
      break;
    case static_cast<int>(MatchStage::rigidity):
      ++c.rigidity;
      break;
    default:
      break;
  }
}

TheoremReport run(const TheoremSpec& spec, int threads) {
  spec.validate();
  TheoremReport report;
  report.gamma = spec.dataset.gamma;
  report.metric = spec.metric.name();
  report.datasets = spec.datasets;

  std::vector<AssumptionDataset> datasets;
  datasets.reserve(spec.datasets);
  for (std::size_t d = 0; d < spec.datasets; ++d)
    datasets.emplace_back(spec.dataset, derive_seed(spec.seed, {0xda7a, d}));
  report.lipschitz = datasets.front().lipschitz();
  report.delta = spec.delta.value_or(datasets.front().smoothness_delta());

  TheoreticalConfig cfg;
  cfg.gamma = spec.dataset.gamma;
  cfg.delta = report.delta;
  cfg.metric = spec.metric;
  cfg.rigidity_epsilon = spec.rigidity_epsilon;
  cfg.rigidity_iterations = spec.rigidity_iterations;
  cfg.seed = spec.seed;

  // Audits come first; a failed premise means no trial results at all.
  for (std::size_t d = 0; d < spec.datasets; ++d) {
    const std::size_t share = spec.smoothness_samples / spec.datasets +
                              (d < spec.smoothness_samples % spec.datasets ? 1 : 0);
    const AuditResult s = audit_classifier_smoothness(datasets[d], share, report.delta, spec.metric,
                                                      derive_seed(spec.seed, {0x5a, d}));
    report.audits.smoothness.samples += s.samples;
    report.audits.smoothness.violations += s.violations;
    report.audits.smoothness.worst = std::max(report.audits.smoothness.worst, s.worst);
    const MetricAudit m = audit_metric_axioms(datasets[d], spec.metric, spec.metric_samples,
                                              derive_seed(spec.seed, {0x3e, d}));
    for (auto [dst, src] : {std::pair{&report.audits.metric.triangle, &m.triangle},
                            std::pair{&report.audits.metric.permutation, &m.permutation}}) {
      dst->samples += src->samples;
      dst->violations += src->violations;
      dst->worst = std::max(dst->worst, src->worst);
    }
  }

  struct Job {
    std::size_t dataset;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < spec.datasets; ++d) {
    const std::size_t share = spec.trials / spec.datasets + (d < spec.trials % spec.datasets ? 1 : 0);
    for (std::size_t t = 0; t < share; ++t) jobs.push_back({d, derive_seed(spec.seed, {0x7e, d, t})});
  }

  std::vector<TrialOutcome> outcomes(jobs.size());
  const bool pre_ok = report.audits.smoothness.passed() && report.audits.metric.passed();
  if (pre_ok) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(jobs.size()); ++i) {
      try {
        const Job& j = jobs[static_cast<std::size_t>(i)];
        outcomes[static_cast<std::size_t>(i)] = run_trial(datasets[j.dataset], spec, cfg, j.seed);
      } catch (...) {
#pragma omp critical(verikit_theorem_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  }

  for (const TrialOutcome& o : outcomes) {
    if (!pre_ok) break;
    ++report.audits.dense_queries;
    report.audits.dense_worst_distance = std::max(report.audits.dense_worst_distance, o.dense_distance);
    if (!o.dense_ok) ++report.audits.dense_violations;
  }
  report.premises_ok = pre_ok && report.audits.passed();
  if (!report.premises_ok) return report;

  for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
    EstimatorArm arm;
    arm.estimator = spec.estimators[e];
    for (const TrialOutcome& o : outcomes) {
      const auto& a = o.arms[e];
      ++arm.wrong_class_queries;
      arm.false_positives += static_cast<std::size_t>(a[0]);
      add_stage(arm.wrong_class_rejections, a[1]);
      ++arm.correct_class_queries;
      arm.correct_accepted += static_cast<std::size_t>(a[2]);
      add_stage(arm.correct_class_rejections, a[3]);
    }
    report.arms.push_back(arm);
  }
  return report;
}

}  // namespace

TheoremReport run_theorem(const TheoremSpec& spec, int jobs) {
  const int threads = resolve_jobs(jobs);
  return run(spec, omp_in_parallel() ? 1 : threads);
}

TheoremReport run_theorem_serial(const TheoremSpec& spec) { return run(spec, 1); }

}  // namespace verikit
