#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "common.hpp"
#include "verikit/core/io.hpp"
#include "verikit/core/warp.hpp"
#include "verikit/eval/experiments.hpp"
#include "verikit/eval/sift.hpp"
#include "verikit/io/report_io.hpp"
#include "verikit/matcher/exhaustive_ncc.hpp"
#include "verikit/util/error.hpp"

namespace verikit::cli {

namespace {

json verify_summary(const std::vector<DetectionReport>& reports, const io::RunConfig& cfg) {
  std::map<std::string, std::size_t> reasons;
  std::size_t accepted = 0;
  for (const DetectionReport& r : reports) {
    ++reasons[r.result.reason];
    accepted += r.result.accepted ? 1 : 0;
  }
  return {{"detections", reports.size()},
          {"accepted", accepted},
          {"rejected", reports.size() - accepted},
          {"missing_flow", missing_flow_count(reports)},
          {"reasons", reasons},
          {"enabled", cfg.enabled.names()},
          {"thresholds", thresholds_json(cfg.thresholds)}};
}

bool has_ground_truth(const GroundTruthByScene& gt) {
  for (const auto& [scene, boxes] : gt)
    if (!boxes.empty()) return true;
  return false;
}

void add_verify(CLI::App& root, CommandList& cmds) {
  struct State {
    SuiteArgs in;
    RunArgs run;
    bool full_scores = false;
    std::string matcher = "none";
    NccMatcherOptions ncc;
  };
  auto st = std::make_shared<State>();
  Command& cmd = add_command(root, cmds, "verify", "run the verification tests on every detection");
  st->in.add(cmd);
  st->run.add(cmd, true);
  cmd.settings.add_flag(cmd.app, "full_scores", st->full_scores,
                        "compute every score instead of stopping at the first failed test");
  cmd.settings.add(cmd.app, "matcher", st->matcher, "flow source: none (read flows/) or exhaustive-ncc")
      ->check(CLI::IsMember({"none", "exhaustive-ncc"}));
  cmd.settings.add(cmd.app, "ncc_patch_radius", st->ncc.patch_radius, "exhaustive-ncc patch radius");
  cmd.settings.add(cmd.app, "ncc_min_score", st->ncc.min_score, "exhaustive-ncc acceptance score");
  cmd.run = [st](Context& ctx) {
    const io::RunConfig cfg = st->run.resolve(ctx);
    Suite suite = st->in.load(ctx, st->matcher == "none");
    if (st->matcher == "exhaustive-ncc") {
      const std::size_t n = match_suite_flows(suite, st->ncc, cfg.viewpoints, ctx.jobs);
      spdlog::info("exhaustive-ncc computed {} flows", n);
    }
    const auto mode = st->full_scores ? ScoreMode::full : ScoreMode::short_circuit;
    const auto reports = verify_suite(suite, cfg.batch_options(mode), ctx.jobs);
    const std::size_t missing = missing_flow_count(reports);
    if (missing > 0) spdlog::warn("{} detections rejected for missing flows", missing);

    io::write_text(ctx.output("reports.jsonl"), io::format_reports(reports));
    json summary = verify_summary(reports, cfg);
    const GroundTruthByScene gt = ground_truth_of(suite);
    if (has_ground_truth(gt)) {
      const PipelineResult p = evaluate_reports(suite, reports);
      summary["base"] = eval_json(p.base);
      summary["verified"] = eval_json(p.verified);
    }
    io::write_text(ctx.output("summary.json"), summary.dump(2) + "\n");
    ctx.out << "verified " << reports.size() << " detections: " << summary["accepted"].get<std::size_t>()
            << " accepted, " << missing << " missing-flow\n";
    return 0;
  };
}

void add_rerank(CLI::App& root, CommandList& cmds) {
  struct State {
    std::string reports;
    bool base = false;
  };
  auto st = std::make_shared<State>();
  Command& cmd = add_command(root, cmds, "rerank", "rank accepted detections above rejected ones");
  cmd.settings.add(cmd.app, "reports", st->reports, "reports.jsonl from verify")->required();
  cmd.settings.add_flag(cmd.app, "base", st->base, "rank by confidence alone");
  cmd.run = [st](Context& ctx) {
    ctx.inputs.push_back(st->reports);
    const auto ranked = ranked_from_reports(io::read_reports(st->reports), !st->base);
    std::ostringstream csv;
    csv << "rank,scene,detection_id,class_id,confidence,accepted\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const RankedDetection& r = ranked[i];
      csv << i + 1 << ',' << r.scene_id << ',' << r.detection.detection_id << ','
          << r.detection.class_id << ',' << io::format_double(r.detection.confidence) << ','
          << (r.accepted ? 1 : 0) << '\n';
    }
    io::write_text(ctx.output("ranked.csv"), csv.str());
    ctx.out << "ranked " << ranked.size() << " detections\n";
    return 0;
  };
}

void add_eval(CLI::App& root, CommandList& cmds) {
  struct State {
    std::string reports;
    std::string annotations;
    std::string suite;
    double iou = 0.5;
  };
  auto st = std::make_shared<State>();
  Command& cmd = add_command(root, cmds, "eval", "mAP, max precision and PR curves before and after reranking");
  cmd.settings.add(cmd.app, "reports", st->reports, "reports.jsonl from verify")->required();
  cmd.settings.add(cmd.app, "annotations", st->annotations, "ground-truth annotations file");
  cmd.settings.add(cmd.app, "suite", st->suite, "suite directory holding annotations.jsonl");
  cmd.settings.add(cmd.app, "iou", st->iou, "IoU for a true positive")->check(CLI::Range(0.0, 1.0));
  cmd.run = [st](Context& ctx) {
    fs::path ann = st->annotations;
    if (ann.empty()) {
      if (st->suite.empty()) throw ValidationError("give --annotations or --suite");
      ann = io::SuitePaths::under(st->suite).annotations;
    }
    ctx.inputs.push_back(st->reports);
    ctx.inputs.push_back(ann);
    const auto reports = io::read_reports(st->reports);
    const GroundTruthByScene gt = io::read_annotations(ann).ground_truth;
    const auto base_ranked = ranked_from_reports(reports, false);
    const auto verified_ranked = ranked_from_reports(reports, true);
    const EvalSummary base = mean_ap(base_ranked, gt, st->iou);
    const EvalSummary verified = mean_ap(verified_ranked, gt, st->iou);

    io::write_text(ctx.output("metrics.csv"), metrics_csv(verified));
    io::write_text(ctx.output("metrics_base.csv"), metrics_csv(base));
    io::write_text(ctx.output("pr.csv"), "ranking,class,rank,recall,precision\n" +
                                             pr_csv_rows("base", base, base_ranked, gt, st->iou) +
                                             pr_csv_rows("verified", verified, verified_ranked, gt, st->iou));
    const json summary = {{"base", eval_json(base)}, {"verified", eval_json(verified)}, {"iou", st->iou}};
    io::write_text(ctx.output("summary.json"), summary.dump(2) + "\n");
    ctx.out << "base: map=" << io::format_double(base.map)
            << " max_precision=" << io::format_double(base.max_precision) << "\n"
            << "verified: map=" << io::format_double(verified.map)
            << " max_precision=" << io::format_double(verified.max_precision) << "\n";
    return 0;
  };
}

using MatchTable = std::map<std::pair<int, std::int64_t>, std::map<int, std::vector<Correspondence>>>;

MatchTable read_matches(const fs::path& path) {
  const auto bytes = io::read_bytes(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  MatchTable out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      const int scene = j.value("scene", 0);
      const auto det = j.at("detection_id").get<std::int64_t>();
      const int templ = j.at("template").get<int>();
      auto& list = out[{scene, det}][templ];
      for (const json& m : j.at("matches")) {
        const auto v = m.get<std::vector<double>>();
        if (v.size() != 4) throw ValidationError(where + ": a match is [x, y, x', y']");
        list.push_back({Vec2(v[0], v[1]), Vec2(v[2], v[3])});
      }
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return out;
}

void add_sift_verify(CLI::App& root, CommandList& cmds) {
  struct State {
    std::string annotations;
    std::string matches;
    SiftThresholds th;
  };
  auto st = std::make_shared<State>();
  Command& cmd = add_command(root, cmds, "sift-verify", "sparse-keypoint baseline verifier over supplied matches");
  cmd.settings.add(cmd.app, "annotations", st->annotations, "detections (and optional ground truth)")->required();
  cmd.settings.add(cmd.app, "matches", st->matches, "matches.jsonl, targets in crop coordinates")->required();
  cmd.settings.add(cmd.app, "s_matches_min", st->th.s_matches_min, "a template needs more matches than this");
  cmd.settings.add(cmd.app, "s_precision_min", st->th.s_precision_min,
                   "a template needs a larger in-box fraction than this");
  cmd.run = [st](Context& ctx) {
    ctx.inputs.push_back(st->annotations);
    ctx.inputs.push_back(st->matches);
    const io::Annotations ann = io::read_annotations(st->annotations);
    const MatchTable table = read_matches(st->matches);
    for (const auto& [key, per] : table) {
      const auto it = ann.detections.find(key.first);
      const bool known = it != ann.detections.end() &&
                         std::any_of(it->second.begin(), it->second.end(),
                                     [&](const Detection& d) { return d.detection_id == key.second; });
      if (!known)
        throw ValidationError(st->matches + ": matches for unknown detection " + std::to_string(key.second) +
                              " in scene " + std::to_string(key.first));
    }
    std::string lines;
    std::vector<RankedDetection> items;
    std::size_t accepted = 0;
    for (const auto& [scene, dets] : ann.detections) {
      for (const Detection& d : dets) {
        std::vector<int> ids;
        std::vector<std::vector<Correspondence>> per_template;
        if (auto it = table.find({scene, d.detection_id}); it != table.end())
          for (const auto& [m, list] : it->second) {
            ids.push_back(m);
            per_template.push_back(list);
          }
        const Box box_in_crop = crop_window(d.box).to_crop(d.box);
        const SiftResult r = sift_verify(per_template, box_in_crop, st->th);
        json j = {{"scene", scene},
                  {"detection_id", d.detection_id},
                  {"class_id", d.class_id},
                  {"confidence", d.confidence},
                  {"accepted", r.accepted},
                  {"best_template", r.best_template ? json(ids[*r.best_template]) : json(nullptr)}};
        json templates = json::array();
        for (std::size_t i = 0; i < r.templates.size(); ++i)
          templates.push_back({{"template", ids[i]},
                               {"matches", r.templates[i].matches},
                               {"precision", r.templates[i].precision},
                               {"passed", r.templates[i].passed}});
        j["templates"] = std::move(templates);
        lines += j.dump() + "\n";
        items.push_back({scene, d, r.accepted});
        accepted += r.accepted ? 1 : 0;
      }
    }
    io::write_text(ctx.output("sift_reports.jsonl"), lines);
    json summary = {{"detections", items.size()}, {"accepted", accepted}};
    if (has_ground_truth(ann.ground_truth)) {
      std::vector<RankedDetection> base = items;
      for (RankedDetection& b : base) b.accepted = true;
      summary["base"] = eval_json(mean_ap(rerank(base), ann.ground_truth));
      summary["verified"] = eval_json(mean_ap(rerank(items), ann.ground_truth));
    }
    io::write_text(ctx.output("summary.json"), summary.dump(2) + "\n");
    ctx.out << "sift-verify: " << accepted << " of " << items.size() << " detections accepted\n";
    return 0;
  };
}

}  // namespace

void register_verify_commands(CLI::App& root, CommandList& cmds) {
  add_verify(root, cmds);
  add_rerank(root, cmds);
  add_eval(root, cmds);
  add_sift_verify(root, cmds);
}

}  // namespace verikit::cli
