#include <spdlog/spdlog.h>

#include <sstream>

#include "common.hpp"
#include "verikit/core/io.hpp"
#include "verikit/synth/suite.hpp"
#include "verikit/synth/theorem.hpp"
#include "verikit/util/error.hpp"

namespace verikit::cli {

std::string version();

namespace {

void add_synth(CLI::App& root, CommandList& cmds) {
  auto spec = std::make_shared<SuiteSpec>();
  Command& cmd = add_command(root, cmds, "synth", "generate a synthetic detection suite with oracle flows");
  Settings& s = cmd.settings;
  CLI::App* app = cmd.app;
  s.add(app, "num_scenes", spec->num_scenes, "scenes");
  s.add(app, "objects_per_scene", spec->objects_per_scene, "objects placed per scene");
  s.add(app, "false_positive_rate", spec->false_positive_rate, "fraction of detections that are false");
  s.add(app, "num_classes", spec->num_classes, "object classes");
  s.add(app, "templates_per_class", spec->templates_per_class, "viewpoints per class");
  s.add(app, "template_size", spec->template_size, "template side in pixels");
  s.add(app, "scene_size", spec->scene_size, "scene side in pixels");
  s.add(app, "grid", spec->grid, "objects sit in distinct cells of a grid x grid layout");
  s.add(app, "corner_jitter", spec->corner_jitter, "homography corner jitter, fraction of size");
  s.add(app, "box_jitter", spec->box_jitter, "true-positive box noise, fraction of size");
  s.add(app, "matcher_reach", spec->matcher_reach, "angular reach of oracle flows in radians");
  s.add(app, "greedy_candidates", spec->greedy_candidates, "candidates per pixel for non-oracle flows");
  s.add(app, "seed", spec->seed, "generator seed");
  cmd.run = [spec, &cmd](Context& ctx) {
    spec->validate();
    ctx.seeds["seed"] = spec->seed;
    const GeneratedSuite g = make_detection_suite(*spec);
    const io::SuitePaths paths = io::SuitePaths::under(ctx.out_dir);
    io::write_suite(paths, g.suite);
    ctx.outputs.insert(ctx.outputs.end(), {"scenes/", "templates/", "flows/", "annotations.jsonl"});
    std::ostringstream kinds;
    kinds << "scene,detection_id,kind\n";
    for (const SceneRecord& r : g.suite.scenes)
      for (const Detection& d : r.detections)
        kinds << r.scene_id << ',' << d.detection_id << ','
              << detection_kind_name(g.kinds.at(d.detection_id)) << '\n';
    io::write_text(ctx.output("kinds.csv"), kinds.str());
    ctx.extra["spec"] = cmd.settings.snapshot();
    ctx.extra["generator_version"] = version();
    std::size_t flows = 0;
    for (const SceneRecord& r : g.suite.scenes) flows += r.flows.size();
    ctx.out << "wrote " << g.suite.scenes.size() << " scenes, " << g.suite.detection_count()
            << " detections, " << flows << " flows to " << ctx.out_dir << "\n";
    return 0;
  };
}

json audit_json(const AuditResult& a) {
  return {{"samples", a.samples}, {"violations", a.violations}, {"worst", a.worst}, {"passed", a.passed()}};
}

json stage_json(const StageCounts& c) {
  return {{"similar_object", c.similar_object}, {"color", c.color}, {"rigidity", c.rigidity}};
}

json theorem_json(const TheoremReport& r) {
  json arms = json::array();
  for (const EstimatorArm& a : r.arms)
    arms.push_back({{"estimator", estimator_name(a.estimator)},
                    {"wrong_class_queries", a.wrong_class_queries},
                    {"false_positives", a.false_positives},
                    {"correct_class_queries", a.correct_class_queries},
                    {"correct_accepted", a.correct_accepted},
                    {"recall", a.recall()},
                    {"wrong_class_rejections", stage_json(a.wrong_class_rejections)},
                    {"correct_class_rejections", stage_json(a.correct_class_rejections)}});
  const TheoremAudits& au = r.audits;
  return {{"gamma", r.gamma},
          {"delta", r.delta},
          {"lipschitz", r.lipschitz},
          {"metric", r.metric},
          {"datasets", r.datasets},
          {"premises_ok", r.premises_ok},
          {"audits",
           {{"dense_dataset",
             {{"queries", au.dense_queries},
              {"violations", au.dense_violations},
              {"worst_distance", au.dense_worst_distance},
              {"passed", au.dense_violations == 0}}},
            {"classifier_smoothness", audit_json(au.smoothness)},
            {"triangle_inequality", audit_json(au.metric.triangle)},
            {"permutation_invariance", audit_json(au.metric.permutation)},
            {"passed", au.passed()}}},
          {"arms", arms}};
}

void add_theorem(CLI::App& root, CommandList& cmds) {
  struct State {
    TheoremSpec spec;
    std::vector<std::string> estimators = {"ground_truth", "random", "adversarial"};
    std::string metric = "linf";
    std::string delta = "auto";
  };
  auto st = std::make_shared<State>();
  Command& cmd = add_command(root, cmds, "theorem",
                             "zero-false-positive check on audited assumption datasets");
  Settings& s = cmd.settings;
  CLI::App* app = cmd.app;
  AssumptionDatasetSpec& d = st->spec.dataset;
  s.add(app, "trials", st->spec.trials, "wrong-class queries per estimator");
  s.add(app, "datasets", st->spec.datasets, "independent datasets the trials are split across");
  s.add(app, "estimators", st->estimators, "ground_truth, random, adversarial");
  s.add(app, "metric", st->metric, "linf, lp:<p> or ncc");
  s.add(app, "delta", st->delta, "classifier margin; auto derives it from gamma");
  s.add(app, "gamma", d.gamma, "dense-dataset radius");
  s.add(app, "num_classes", d.num_classes, "classes per dataset");
  s.add(app, "templates_per_class", d.templates_per_class, "templates per class");
  s.add(app, "image_size", d.image_size, "template and query side in pixels");
  s.add(app, "channels", d.channels, "color channels");
  s.add(app, "lighting_bound", d.lighting_bound, "bound on |gain - 1| + |bias|");
  s.add(app, "min_band_width", d.min_band_width, "narrowest class intensity band");
  s.add(app, "rigidity_epsilon", st->spec.rigidity_epsilon, "inlier threshold of the rigidity test");
  s.add(app, "rigidity_iterations", st->spec.rigidity_iterations, "RANSAC iterations of the rigidity test");
  s.add(app, "smoothness_samples", st->spec.smoothness_samples, "classifier smoothness audit samples");
  s.add(app, "metric_samples", st->spec.metric_samples, "metric axiom audit samples per dataset");
  s.add(app, "seed", st->spec.seed, "seed");
  cmd.run = [st](Context& ctx) {
    TheoremSpec spec = st->spec;
    spec.estimators.clear();
    for (const std::string& e : st->estimators) spec.estimators.push_back(parse_estimator(e));
    spec.metric = DistanceMetric::parse(st->metric);
    if (st->delta != "auto") {
      std::size_t used = 0;
      try {
        spec.delta = std::stod(st->delta, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != st->delta.size()) throw ValidationError("delta must be a number or 'auto'");
    }
    spec.validate();
    ctx.seeds["seed"] = spec.seed;
    const TheoremReport report = run_theorem(spec, ctx.jobs);
    io::write_text(ctx.output("theorem.json"), theorem_json(report).dump(2) + "\n");
    const TheoremAudits& au = report.audits;
    ctx.out << "metric: " << report.metric << " gamma: " << io::format_double(report.gamma)
            << " delta: " << io::format_double(report.delta) << "\n"
            << "audits: dense_dataset " << (au.dense_violations == 0 ? "pass" : "FAIL") << " ("
            << au.dense_violations << "/" << au.dense_queries << "), classifier_smoothness "
            << (au.smoothness.passed() ? "pass" : "FAIL") << " (" << au.smoothness.violations << "/"
            << au.smoothness.samples << "), metric_axioms " << (au.metric.passed() ? "pass" : "FAIL")
            << "\n";
    if (!report.premises_ok) {
      ctx.out << "invalid-premises\n";
      spdlog::error("assumption audit failed; no trials were run");
      return 3;
    }
    for (const EstimatorArm& a : report.arms)
      ctx.out << estimator_name(a.estimator) << ": false_positives: " << a.false_positives << " of "
              << a.wrong_class_queries << ", recall: " << io::format_double(a.recall()) << " ("
              << a.correct_accepted << "/" << a.correct_class_queries << ")\n";
    return 0;
  };
}

}  // namespace

void register_synth_commands(CLI::App& root, CommandList& cmds) {
  add_synth(root, cmds);
  add_theorem(root, cmds);
}

}  // namespace verikit::cli
