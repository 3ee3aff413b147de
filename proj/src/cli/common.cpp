#include "common.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "verikit/util/error.hpp"

namespace verikit::cli {

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::string Settings::flag_names(const std::string& key) {
  std::string hyphen = key;
  std::replace(hyphen.begin(), hyphen.end(), '_', '-');
  return hyphen == key ? "--" + key : "--" + hyphen + ",--" + key;
}

CLI::Option* Settings::add_flag(CLI::App* app, const std::string& key, bool& ref,
                                const std::string& desc) {
  CLI::Option* opt = app->add_flag(flag_names(key), ref, desc);
  entries_.push_back({key, [&ref] { return to_text(ref); }, true, false, true});
  return opt;
}

bool Settings::knows(const std::string& key) const {
  const std::string k = normalize_key(key);
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == k; });
}

json Settings::snapshot() const {
  json j = json::object();
  for (const Entry& e : entries_)
    if (e.replay) j[e.key] = e.value();
  return j;
}

std::vector<std::string> Settings::inject(const io::ConfigPairs& pairs,
                                          const std::vector<std::string>& user_args, bool lenient,
                                          const std::string& source) const {
  std::set<std::string> given;
  for (const std::string& a : user_args) {
    if (a.size() < 3 || a.compare(0, 2, "--") != 0) continue;
    given.insert(normalize_key(a.substr(2, a.find('=') == std::string::npos ? std::string::npos
                                                                             : a.find('=') - 2)));
  }
  std::vector<std::string> out;
  for (const auto& [raw_key, value] : pairs) {
    const std::string key = normalize_key(raw_key);
    const auto it =
        std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
    if (it == entries_.end() || !it->replay) {
      if (lenient) continue;
      throw ValidationError(source + ": unknown config key '" + raw_key + "'");
    }
    if (given.count(key)) continue;
    if (it->vector && value.empty()) continue;
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (it->flag) {
      out.push_back("--" + flag + "=" + value);
    } else {
      out.push_back("--" + flag);
      out.push_back(value);
    }
  }
  return out;
}

Command& add_command(CLI::App& root, CommandList& cmds, const std::string& name,
                     const std::string& description) {
  auto cmd = std::make_unique<Command>();
  cmd->name = name;
  cmd->app = root.add_subcommand(name, description);
  cmd->app->add_option("--out", cmd->out_dir, "output directory")->required();
  cmd->app->add_option("--jobs,-j", cmd->jobs, "worker threads; 0 uses every core")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->app->add_option("--config", cmd->config_path,
                       "key = value file or run manifest; command-line flags take precedence");
  cmds.push_back(std::move(cmd));
  return *cmds.back();
}

void SuiteArgs::add(Command& cmd) {
  cmd.settings.add(cmd.app, "suite", suite, "suite directory (scenes/, templates/, flows/, annotations.jsonl)");
  cmd.settings.add(cmd.app, "scenes", scenes, "scene directory, overrides the suite's");
  cmd.settings.add(cmd.app, "templates", templates, "template directory, overrides the suite's");
  cmd.settings.add(cmd.app, "flows", flows, "flow directory, overrides the suite's");
  cmd.settings.add(cmd.app, "annotations", annotations, "annotations file, overrides the suite's");
}

io::SuitePaths SuiteArgs::paths() const {
  io::SuitePaths p = io::SuitePaths::under(suite.empty() ? fs::path(".") : fs::path(suite));
  if (!scenes.empty()) p.scenes = scenes;
  if (!templates.empty()) p.templates = templates;
  if (!flows.empty()) p.flows = flows;
  if (!annotations.empty()) p.annotations = annotations;
  if (suite.empty() && (scenes.empty() || templates.empty() || annotations.empty()))
    throw ValidationError("give --suite, or all of --scenes, --templates and --annotations");
  return p;
}

Suite SuiteArgs::load(Context& ctx, bool load_flows) const {
  const io::SuitePaths p = paths();
  Suite s = io::read_suite(p, load_flows);
  for (const fs::path& f : io::list_files({p.annotations, p.scenes, p.templates})) ctx.inputs.push_back(f);
  if (load_flows)
    for (const fs::path& f : io::list_files({p.flows})) ctx.inputs.push_back(f);
  spdlog::info("loaded {} scenes, {} detections, {} template classes", s.scenes.size(),
               s.detection_count(), s.templates.size());
  return s;
}

void RunArgs::add(Command& cmd, bool with_viewpoints) {
  Settings& s = cmd.settings;
  CLI::App* app = cmd.app;
  Thresholds& t = cfg.thresholds;
  RansacConfig& r = cfg.ransac;
  s.add(app, "alpha_rig", t.alpha_rig, "f_inlier threshold");
  s.add(app, "alpha_color", t.alpha_color, "f_color threshold");
  s.add(app, "alpha_prec", t.alpha_prec, "f_precision threshold");
  s.add(app, "alpha_rec", t.alpha_rec, "f_recall threshold");
  s.add(app, "eta_diff", t.eta_diff, "sim score threshold");
  s.add(app, "eta_iou", t.eta_iou, "IoU at which other-class detections count as overlapping");
  s.add(app, "iterations", r.iterations, "RANSAC iterations");
  s.add(app, "epsilon", r.epsilon, "RANSAC inlier threshold in pixels");
  s.add(app, "seed", r.seed, "base seed for RANSAC and correspondence sampling");
  s.add(app, "min_correspondences", r.min_correspondences, "fewer correspondences score 0");
  s.add(app, "stride", r.stride, "flow subsampling step");
  s.add(app, "max_count", r.max_count, "correspondence cap per flow");
  s.add(app, "enabled", enabled, "comma-separated tests to run");
  s.add(app, "enable", enable, "tests to add to --enabled");
  s.add(app, "disable", disable, "tests to remove");
  if (with_viewpoints)
    s.add(app, "viewpoints", cfg.viewpoints, "equally spaced templates per class; 0 uses all");
}

io::RunConfig RunArgs::resolve(Context& ctx) const {
  io::RunConfig out = cfg;
  out.enabled = enabled.empty() ? TestSet::none() : TestSet::parse(enabled);
  for (const std::string& t : enable) out.enabled = out.enabled.with(parse_test(t));
  for (const std::string& t : disable) out.enabled = out.enabled.without(parse_test(t));
  out.validate();
  ctx.seeds["seed"] = out.ransac.seed;
  return out;
}

json thresholds_json(const Thresholds& t) {
  return {{"alpha_rig", t.alpha_rig},       {"alpha_color", t.alpha_color},
          {"alpha_prec", t.alpha_prec},     {"alpha_rec", t.alpha_rec},
          {"eta_diff", t.eta_diff},         {"eta_iou", t.eta_iou}};
}

json eval_json(const EvalSummary& s) {
  json classes = json::array();
  for (const ClassResult& c : s.per_class)
    classes.push_back({{"class_id", c.class_id},
                       {"ap", c.ap ? json(*c.ap) : json(nullptr)},
                       {"max_precision", c.max_precision},
                       {"num_ground_truth", c.num_ground_truth},
                       {"num_detections", c.num_detections},
                       {"true_positives", c.true_positives}});
  return {{"map", s.map},
          {"max_precision", s.max_precision},
          {"num_detections", s.num_detections},
          {"num_accepted", s.num_accepted},
          {"per_class", classes}};
}

std::string metrics_csv(const EvalSummary& s) {
  std::ostringstream out;
  out << "class,ap,max_precision\n";
  for (const ClassResult& c : s.per_class)
    out << c.class_id << ',' << (c.ap ? io::format_double(*c.ap) : "") << ','
        << io::format_double(c.max_precision) << '\n';
  out << "all," << io::format_double(s.map) << ',' << io::format_double(s.max_precision) << '\n';
  return out.str();
}

std::string pr_csv_rows(const std::string& ranking, const EvalSummary& s,
                        std::span<const RankedDetection> ranked, const GroundTruthByScene& gt,
                        double iou_threshold) {
  std::ostringstream out;
  for (std::size_t i = 0; i < s.curve.size(); ++i)
    out << ranking << ",all," << i + 1 << ',' << io::format_double(s.curve[i].recall) << ','
        << io::format_double(s.curve[i].precision) << '\n';
  for (const ClassResult& c : s.per_class) {
    const auto curve = average_precision(ranked, gt, c.class_id, iou_threshold);
    if (!curve) continue;
    for (std::size_t i = 0; i < curve->points.size(); ++i)
      out << ranking << ',' << c.class_id << ',' << i + 1 << ','
          << io::format_double(curve->points[i].recall) << ','
          << io::format_double(curve->points[i].precision) << '\n';
  }
  return out.str();
}

}  // namespace verikit::cli
