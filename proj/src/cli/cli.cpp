#include "verikit/cli/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <iostream>

#include "common.hpp"
#include "verikit/core/io.hpp"
#include "verikit/util/error.hpp"
#include "verikit/util/parallel.hpp"
#include "verikit/util/sha256.hpp"

#ifndef VERIKIT_VERSION
#define VERIKIT_VERSION "0.0.0"
#endif

namespace verikit::cli {

std::string version() { return VERIKIT_VERSION; }

void configure_logging() {
  static const bool once = [] {
    auto logger = spdlog::stderr_color_mt("verikit");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)once;
  const char* env = std::getenv("VERIKIT_LOG");
  const std::string level = env ? env : "";
  if (level.empty()) {
    spdlog::set_level(spdlog::level::warn);
    return;
  }
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") {
    spdlog::set_level(spdlog::level::warn);
    spdlog::warn("VERIKIT_LOG='{}' is not a log level; using warn", level);
    return;
  }
  spdlog::set_level(parsed);
}

namespace {

// Position of the subcommand name among the arguments.
std::ptrdiff_t find_command(const std::vector<std::string>& args, const CommandList& cmds) {
  for (std::size_t i = 0; i < args.size(); ++i)
    for (const auto& c : cmds)
      if (args[i] == c->name) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

std::string config_argument(const std::vector<std::string>& args, std::size_t from) {
  for (std::size_t i = from; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

void write_manifest(const Command& cmd, const Context& ctx, double seconds) {
  json inputs = json::object();
  for (const fs::path& p : ctx.inputs) inputs[p.generic_string()] = sha256_file(p);
  json m = ctx.extra;
  m["command"] = cmd.name;
  m["config"] = cmd.settings.snapshot();
  m["seeds"] = ctx.seeds;
  m["inputs"] = inputs;
  m["outputs"] = ctx.outputs;
  m["version"] = version();
  m["runtime"] = {{"jobs", ctx.jobs}};
  m["wall_time_seconds"] = seconds;
  io::write_text(fs::path(ctx.out_dir) / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App root("verikit: detection verification from dense template-to-crop flows", "verikit");
  root.set_version_flag("--version", version());
  root.require_subcommand(1);
  CommandList cmds;
  register_verify_commands(root, cmds);
  register_synth_commands(root, cmds);
  register_experiment_commands(root, cmds);

  std::vector<std::string> args = raw_args;
  try {
    const std::ptrdiff_t at = find_command(args, cmds);
    if (at >= 0) {
      const std::string config = config_argument(args, static_cast<std::size_t>(at) + 1);
      if (!config.empty()) {
        const Command& cmd = **std::find_if(cmds.begin(), cmds.end(),
                                            [&](const auto& c) { return c->name == args[at]; });
        bool manifest = false;
        const io::ConfigPairs pairs = io::read_config_pairs(config, &manifest);
        const std::vector<std::string> user(args.begin() + at + 1, args.end());
        const auto injected = cmd.settings.inject(pairs, user, manifest, config);
        args.insert(args.begin() + at + 1, injected.begin(), injected.end());
      }
    }
  } catch (const ValidationError& e) {
    err << "verikit: error: " << e.what() << "\n";
    return kExitValidation;
  }

  std::reverse(args.begin(), args.end());
  try {
    root.parse(args);
  } catch (const CLI::Success& e) {
    root.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    root.exit(e, out, err);
    return kExitValidation;
  }

  Command* cmd = nullptr;
  for (const auto& c : cmds)
    if (c->app->parsed()) cmd = c.get();
  if (!cmd) {
    err << root.help();
    return kExitValidation;
  }

  Context ctx(out, err);
  ctx.jobs = resolve_jobs(cmd->jobs <= 0 ? default_jobs() : cmd->jobs);
  ctx.out_dir = cmd->out_dir;
  ctx.config_path = cmd->config_path;
  if (!ctx.config_path.empty()) ctx.inputs.push_back(ctx.config_path);
  const auto start = std::chrono::steady_clock::now();
  try {
    fs::create_directories(ctx.out_dir);
    const int code = cmd->run(ctx);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(*cmd, ctx, seconds);
    return code;
  } catch (const InvalidPremises& e) {
    out << "invalid-premises\n";
    err << "verikit: invalid-premises: " << e.what() << "\n";
    return kExitInvalidPremises;
  } catch (const Error& e) {
    err << "verikit: error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "verikit: error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "verikit: internal error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace verikit::cli
