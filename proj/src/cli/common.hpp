#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

#include "verikit/eval/eval.hpp"
#include "verikit/io/config.hpp"
#include "verikit/io/suite_io.hpp"
#include "verikit/verify/batch.hpp"

namespace verikit::cli {

using nlohmann::json;
namespace fs = std::filesystem;

template <typename T>
struct is_vector : std::false_type {};
template <typename T>
struct is_vector<std::vector<T>> : std::true_type {};

template <typename T>
std::string to_text(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    return io::format_double(v);
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else if constexpr (is_vector<T>::value) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + to_text(v[i]);
    return out;
  } else {
    return std::string(v);
  }
}

/// Options of one subcommand. Every option is addressable by a config key
/// (underscores) and by flags with hyphens or underscores.
class Settings {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& key, T& ref, const std::string& desc,
                   bool replay = true) {
    CLI::Option* opt = app->add_option(flag_names(key), ref, desc)->capture_default_str();
    if constexpr (is_vector<T>::value) opt->delimiter(',');
    entries_.push_back({key, [&ref] { return to_text(ref); }, replay, is_vector<T>::value, false});
    return opt;
  }
  CLI::Option* add_flag(CLI::App* app, const std::string& key, bool& ref, const std::string& desc);

  bool knows(const std::string& key) const;
  /// Replayable settings as strings, keyed by config key.
  json snapshot() const;

  /// `--key=value` arguments for config pairs the user did not set on the
  /// command line. Unknown keys are validation errors unless `lenient`.
  std::vector<std::string> inject(const io::ConfigPairs& pairs,
                                  const std::vector<std::string>& user_args, bool lenient,
                                  const std::string& source) const;

 private:
  struct Entry {
    std::string key;
    std::function<std::string()> value;
    bool replay = true;
    bool vector = false;
    bool flag = false;
  };
  static std::string flag_names(const std::string& key);
  std::vector<Entry> entries_;
};

std::string normalize_key(std::string key);

/// State shared by every subcommand run.
struct Context {
  Context(std::ostream& o, std::ostream& e) : out(o), err(e) {}

  std::ostream& out;
  std::ostream& err;
  int jobs = 0;
  std::string out_dir;
  std::string config_path;
  std::vector<fs::path> inputs;      ///< hashed into the manifest
  std::vector<std::string> outputs;  ///< file names under out_dir
  json seeds = json::object();
  json extra = json::object();  ///< additional manifest fields

  fs::path output(const std::string& name) {
    outputs.push_back(name);
    return fs::path(out_dir) / name;
  }
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  Settings settings;
  std::string out_dir;
  int jobs = 0;
  std::string config_path;
  std::function<int(Context&)> run;
};

using CommandList = std::vector<std::unique_ptr<Command>>;

/// Creates a subcommand with --out, --jobs and --config.
Command& add_command(CLI::App& root, CommandList& cmds, const std::string& name,
                     const std::string& description);

/// Suite location: --suite DIR with the standard layout, any part of which
/// --scenes/--templates/--flows/--annotations can replace.
struct SuiteArgs {
  std::string suite;
  std::string scenes;
  std::string templates;
  std::string flows;
  std::string annotations;

  void add(Command& cmd);
  io::SuitePaths paths() const;
  Suite load(Context& ctx, bool load_flows) const;
};

/// Thresholds, RANSAC settings and the enabled test set.
struct RunArgs {
  io::RunConfig cfg;
  std::string enabled = "sim,f_color,f_inlier,f_precision,f_recall";
  std::vector<std::string> enable;
  std::vector<std::string> disable;

  void add(Command& cmd, bool with_viewpoints);
  /// Resolved and validated configuration; also records the seed.
  io::RunConfig resolve(Context& ctx) const;
};

json eval_json(const EvalSummary& s);
json thresholds_json(const Thresholds& t);
std::string metrics_csv(const EvalSummary& s);
/// Pooled and per-class PR points, tagged with the ranking name.
std::string pr_csv_rows(const std::string& ranking, const EvalSummary& s,
                        std::span<const RankedDetection> ranked, const GroundTruthByScene& gt,
                        double iou_threshold);

void register_verify_commands(CLI::App& root, CommandList& cmds);
void register_synth_commands(CLI::App& root, CommandList& cmds);
void register_experiment_commands(CLI::App& root, CommandList& cmds);

}  // namespace verikit::cli
