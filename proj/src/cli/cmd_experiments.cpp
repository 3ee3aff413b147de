#include <sstream>

#include "common.hpp"
#include "verikit/core/io.hpp"
#include "verikit/eval/experiments.hpp"
#include "verikit/util/error.hpp"

namespace verikit::cli {

namespace {

void add_sweep(CLI::App& root, CommandList& cmds) {
  struct State {
    SuiteArgs in;
    RunArgs run;
    std::vector<std::size_t> counts = {3, 6, 9, 12, 15};
    bool ablation = false;
  };
  auto st = std::make_shared<State>();
  Command& cmd = add_command(root, cmds, "sweep", "accuracy and speed against the number of viewpoints");
  st->in.add(cmd);
  st->run.add(cmd, false);
  cmd.settings.add(cmd.app, "counts", st->counts, "viewpoint counts per class");
  cmd.settings.add_flag(cmd.app, "ablation", st->ablation, "also drop each test in turn (ablation.csv)");
  cmd.run = [st](Context& ctx) {
    const io::RunConfig cfg = st->run.resolve(ctx);
    if (st->counts.empty()) throw ValidationError("no viewpoint counts given");
    const Suite suite = st->in.load(ctx, true);
    const VerifyOptions options = cfg.batch_options().verify;
    const auto rows = sweep_viewpoints(suite, st->counts, options, ctx.jobs);
    std::ostringstream csv;
    csv << "count,map,max_precision,accepted,seconds_per_detection\n";
    ctx.out << "count  map       max_precision  accepted  s/detection\n";
    for (const SweepRow& r : rows) {
      csv << r.count << ',' << io::format_double(r.map) << ',' << io::format_double(r.max_precision)
          << ',' << r.accepted << ',' << io::format_double(r.seconds_per_detection) << '\n';
      char line[128];
      std::snprintf(line, sizeof line, "%5zu  %.6f  %.6f       %8zu  %.6f\n", r.count, r.map,
                    r.max_precision, r.accepted, r.seconds_per_detection);
      ctx.out << line;
    }
    io::write_text(ctx.output("sweep.csv"), csv.str());
    if (st->ablation) {
      std::ostringstream ab;
      ab << "removed,map,max_precision,accepted\n";
      for (const AblationRow& r : ablation(suite, options, ctx.jobs))
        ab << r.removed << ',' << io::format_double(r.map) << ','
           << io::format_double(r.max_precision) << ',' << r.accepted << '\n';
      io::write_text(ctx.output("ablation.csv"), ab.str());
    }
    return 0;
  };
}

void add_gridsearch(CLI::App& root, CommandList& cmds) {
  struct State {
    SuiteArgs in;
    RunArgs run;
    std::vector<double> alpha_rig, alpha_color, alpha_prec, alpha_rec, eta_diff, eta_iou;
  };
  auto st = std::make_shared<State>();
  Command& cmd = add_command(root, cmds, "gridsearch", "exhaustive threshold search for the best mAP");
  st->in.add(cmd);
  st->run.add(cmd, false);
  Settings& s = cmd.settings;
  const std::string axis = "candidate values; defaults to the configured threshold";
  s.add(cmd.app, "grid_alpha_rig", st->alpha_rig, axis);
  s.add(cmd.app, "grid_alpha_color", st->alpha_color, axis);
  s.add(cmd.app, "grid_alpha_prec", st->alpha_prec, axis);
  s.add(cmd.app, "grid_alpha_rec", st->alpha_rec, axis);
  s.add(cmd.app, "grid_eta_diff", st->eta_diff, axis);
  s.add(cmd.app, "grid_eta_iou", st->eta_iou, axis);
  cmd.run = [st](Context& ctx) {
    const io::RunConfig cfg = st->run.resolve(ctx);
    const Thresholds& t = cfg.thresholds;
    auto pick = [](const std::vector<double>& given, double fallback) {
      return given.empty() ? std::vector<double>{fallback} : given;
    };
    ThresholdGrid grid;
    grid.alpha_rig = pick(st->alpha_rig, t.alpha_rig);
    grid.alpha_color = pick(st->alpha_color, t.alpha_color);
    grid.alpha_prec = pick(st->alpha_prec, t.alpha_prec);
    grid.alpha_rec = pick(st->alpha_rec, t.alpha_rec);
    grid.eta_diff = pick(st->eta_diff, t.eta_diff);
    grid.eta_iou = pick(st->eta_iou, t.eta_iou);
    const Suite suite = st->in.load(ctx, true);
    const GridResult result = grid_search(suite, grid, cfg.batch_options().verify, ctx.jobs);

    std::ostringstream csv;
    csv << "alpha_rig,alpha_color,alpha_prec,alpha_rec,eta_diff,eta_iou,map,max_precision\n";
    for (const GridRow& r : result.rows) {
      for (double v : r.thresholds.as_array()) csv << io::format_double(v) << ',';
      csv << io::format_double(r.map) << ',' << io::format_double(r.max_precision) << '\n';
    }
    io::write_text(ctx.output("grid.csv"), csv.str());

    io::RunConfig best = cfg;
    best.thresholds = result.best;
    std::ostringstream conf;
    for (const auto& [key, value] : best.snapshot()) conf << key << " = " << value << '\n';
    io::write_text(ctx.output("best.conf"), conf.str());
    const json summary = {{"best", thresholds_json(result.best)},
                          {"map", result.map},
                          {"max_precision", result.max_precision},
                          {"points", result.rows.size()}};
    io::write_text(ctx.output("summary.json"), summary.dump(2) + "\n");
    ctx.out << "best of " << result.rows.size() << " points: map=" << io::format_double(result.map)
            << " max_precision=" << io::format_double(result.max_precision) << "\n";
    const json best_json = thresholds_json(result.best);
    for (const auto& [key, value] : best_json.items())
      ctx.out << "  " << key << " = " << io::format_double(value.get<double>()) << "\n";
    return 0;
  };
}

}  // namespace

void register_experiment_commands(CLI::App& root, CommandList& cmds) {
  add_sweep(root, cmds);
  add_gridsearch(root, cmds);
}

}  // namespace verikit::cli
