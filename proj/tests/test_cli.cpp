#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "verikit/cli/cli.hpp"
#include "verikit/core/io.hpp"

#include <json.hpp>

using namespace verikit;
namespace vt = verikit::testing;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// One small suite shared by the tests in this file.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new vt::TempDir("cli");
    const CliRun r = run({"synth", "--out", suite().string(), "--num-scenes", "2", "--templates-per-class", "4",
                       "--num-classes", "3", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path suite() { return dir_->path() / "suite"; }
  static fs::path path(const std::string& name) { return dir_->path() / name; }
  static vt::TempDir* dir_;
};

vt::TempDir* CliTest::dir_ = nullptr;

}  // namespace

TEST_F(CliTest, SynthWritesLayoutAndManifest) {
  for (const char* p : {"scenes/000.png", "scenes/001.png", "templates/0/00.png", "annotations.jsonl", "kinds.csv",
                        "manifest.json"})
    EXPECT_TRUE(fs::exists(suite() / p)) << p;
  const auto m = nlohmann::json::parse(slurp(suite() / "manifest.json"));
  EXPECT_EQ(m["command"], "synth");
  EXPECT_EQ(m["seeds"]["seed"], 3);
  EXPECT_TRUE(m.contains("version"));
}

TEST_F(CliTest, VerifyEvalRerankPipeline) {
  const fs::path out = path("verify");
  CliRun r = run({"verify", "--suite", suite().string(), "--out", out.string(), "--iterations", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "reports.jsonl"));
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_GT(summary["accepted"].get<int>(), 0);
  EXPECT_GE(summary["verified"]["map"].get<double>(), summary["base"]["map"].get<double>());

  r = run({"eval", "--reports", (out / "reports.jsonl").string(), "--suite", suite().string(), "--out",
           path("eval").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("verified: map="), std::string::npos);
  const std::string metrics = slurp(path("eval") / "metrics.csv");
  EXPECT_EQ(metrics.rfind("class,ap,max_precision\n", 0), 0u);
  EXPECT_NE(metrics.find("\nall,"), std::string::npos);

  r = run({"rerank", "--reports", (out / "reports.jsonl").string(), "--out", path("rank").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("rank") / "ranked.csv").rfind("rank,scene,detection_id", 0), 0u);
}

TEST_F(CliTest, ReportsDoNotDependOnJobs) {
  CliRun a = run({"verify", "--suite", suite().string(), "--out", path("j1").string(), "--jobs", "1", "--full-scores"});
  CliRun b = run({"verify", "--suite", suite().string(), "--out", path("j8").string(), "--jobs", "8", "--full-scores"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("j1") / "reports.jsonl"), slurp(path("j8") / "reports.jsonl"));
  EXPECT_EQ(slurp(path("j1") / "summary.json"), slurp(path("j8") / "summary.json"));
}

TEST_F(CliTest, ConfigPrecedenceAndManifestReplay) {
  io::write_text(path("strict.conf"), "alpha_rig = 0.99\nalpha_color = 0.9\n");
  CliRun r = run({"verify", "--suite", suite().string(), "--out", path("c1").string(), "--config",
               path("strict.conf").string(), "--alpha-color", "0.6"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = nlohmann::json::parse(slurp(path("c1") / "manifest.json"));
  EXPECT_EQ(m["config"]["alpha_rig"], "0.99");
  EXPECT_EQ(m["config"]["alpha_color"], "0.6");

  r = run({"verify", "--suite", suite().string(), "--out", path("c2").string(), "--config",
           (path("c1") / "manifest.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("c1") / "reports.jsonl"), slurp(path("c2") / "reports.jsonl"));
}

TEST_F(CliTest, ValidationErrorsExitTwo) {
  io::write_text(path("bad.conf"), "alpha_shape = 1\n");
  EXPECT_EQ(run({"verify", "--suite", suite().string(), "--out", path("e1").string(), "--config",
                 path("bad.conf").string()}).code, 2);
  EXPECT_EQ(run({"verify", "--suite", path("nowhere").string(), "--out", path("e2").string()}).code, 2);
  EXPECT_EQ(run({"verify", "--suite", suite().string(), "--out", path("e3").string(), "--alpha-rig", "abc"}).code, 2);
  EXPECT_EQ(run({"verify", "--suite", suite().string(), "--out", path("e4").string(), "--no-such-flag"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);

  // a truncated flow file is reported with its path and byte offset
  fs::copy(suite(), path("broken"), fs::copy_options::recursive);
  fs::path victim;
  for (const auto& e : fs::directory_iterator(path("broken") / "flows")) {
    victim = e.path();
    break;
  }
  ASSERT_FALSE(victim.empty());
  fs::resize_file(victim, 20);
  const CliRun r = run({"verify", "--suite", path("broken").string(), "--out", path("e5").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(victim.filename().string()), std::string::npos);
  EXPECT_NE(r.err.find("byte offset"), std::string::npos);
}

TEST_F(CliTest, TheoremPremisesAndResults) {
  CliRun r = run({"theorem", "--out", path("t1").string(), "--trials", "30", "--datasets", "2", "--image-size", "16",
               "--smoothness-samples", "100", "--metric-samples", "30"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("ground_truth: false_positives: 0 of 30"), std::string::npos) << r.out;
  const auto t = nlohmann::json::parse(slurp(path("t1") / "theorem.json"));
  EXPECT_TRUE(t["premises_ok"].get<bool>());

  r = run({"theorem", "--out", path("t2").string(), "--trials", "10", "--datasets", "1", "--image-size", "16",
           "--smoothness-samples", "50", "--metric-samples", "200", "--metric", "ncc"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE((r.out + r.err).find("invalid-premises"), std::string::npos);
  EXPECT_EQ(run({"theorem", "--out", path("t3").string(), "--lighting-bound", "0.5"}).code, 2);
}

TEST_F(CliTest, SweepAndGridsearch) {
  CliRun r = run({"sweep", "--suite", suite().string(), "--out", path("sw").string(), "--counts", "2,4", "--ablation",
               "--iterations", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string sweep = slurp(path("sw") / "sweep.csv");
  EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(path("sw") / "ablation.csv"));

  r = run({"gridsearch", "--suite", suite().string(), "--out", path("gs").string(), "--grid-alpha-rig", "0.5,0.9",
           "--grid-alpha-color", "0.3,0.5", "--iterations", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string grid = slurp(path("gs") / "grid.csv");
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 5);
  EXPECT_NE(slurp(path("gs") / "best.conf").find("alpha_rig"), std::string::npos);
  // the chosen thresholds replay through --config
  r = run({"verify", "--suite", suite().string(), "--out", path("gsv").string(), "--config",
           (path("gs") / "best.conf").string()});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, SiftVerifyReadsMatches) {
  std::ostringstream m;
  m << R"({"scene": 0, "detection_id": 999999, "template": 0, "matches": [[0,0,1,1]]})" << "\n";
  io::write_text(path("matches.jsonl"), m.str());
  CliRun r = run({"sift-verify", "--annotations", (suite() / "annotations.jsonl").string(), "--matches",
               path("matches.jsonl").string(), "--out", path("sift").string()});
  EXPECT_EQ(r.code, 2);  // unknown detection
  const std::string ann = slurp(suite() / "annotations.jsonl");
  std::istringstream lines(ann);
  std::string line;
  nlohmann::json first;
  while (std::getline(lines, line)) {
    first = nlohmann::json::parse(line);
    if (!first.contains("type")) break;
  }
  ASSERT_TRUE(first.contains("detection_id"));
  std::ostringstream good;
  good << "{\"scene\": " << first.value("scene", 0) << ", \"detection_id\": " << first["detection_id"]
       << ", \"template\": 0, \"matches\": [[0,0,1,1]]}\n";
  io::write_text(path("matches.jsonl"), good.str());
  r = run({"sift-verify", "--annotations", (suite() / "annotations.jsonl").string(), "--matches",
           path("matches.jsonl").string(), "--out", path("sift").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("sift") / "sift_reports.jsonl"));
}

TEST(CliProcess, ExitCodesAndLogLevel) {
  const std::string cli = VERIKIT_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(cli + " --help"), 0);
  EXPECT_EQ(status(cli + " --version"), 0);
  EXPECT_EQ(status(cli + " verify"), 2);
  EXPECT_EQ(status("VERIKIT_LOG=bogus " + cli + " --help"), 0);
}
