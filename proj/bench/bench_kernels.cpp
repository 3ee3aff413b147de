#include <benchmark/benchmark.h>

#include "support.hpp"
#include "verikit/geometry/ransac.hpp"
#include "verikit/matcher/exhaustive_ncc.hpp"
#include "verikit/synth/suite.hpp"
#include "verikit/synth/theorem.hpp"
#include "verikit/verify/batch.hpp"

using namespace verikit;
namespace vt = verikit::testing;

namespace {

std::vector<Correspondence> ransac_input(std::size_t n) {
  Rng rng(1);
  Eigen::Matrix3d h;
  h << 1.1, 0.1, 5, -0.05, 0.95, 8, 1e-3, -5e-4, 1;
  const FlowField flow = vt::homography_flow(h, 25, static_cast<int>(n / 25));
  auto corrs = flow_to_correspondences(flow, 1, n, 0);
  for (std::size_t i = 0; i < corrs.size(); i += 3) corrs[i].dst = Vec2(rng.uniform(0, 64), rng.uniform(0, 64));
  return corrs;
}

RansacConfig ransac_config() {
  RansacConfig cfg;
  cfg.iterations = 1000;
  cfg.epsilon = 1.0;
  return cfg;
}

void BM_RansacSerial(benchmark::State& state) {
  const auto corrs = ransac_input(static_cast<std::size_t>(state.range(0)));
  const RansacConfig cfg = ransac_config();
  for (auto _ : state) benchmark::DoNotOptimize(ransac_rigidity_serial(corrs, cfg));
}
BENCHMARK(BM_RansacSerial)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_RansacParallel(benchmark::State& state) {
  const auto corrs = ransac_input(static_cast<std::size_t>(state.range(0)));
  const RansacConfig cfg = ransac_config();
  for (auto _ : state) benchmark::DoNotOptimize(ransac_rigidity(corrs, cfg, 0));
}
BENCHMARK(BM_RansacParallel)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

const GeneratedSuite& bench_suite() {
  static const GeneratedSuite g = [] {
    SuiteSpec spec;
    spec.num_scenes = 2;
    spec.templates_per_class = 6;
    return make_detection_suite(spec);
  }();
  return g;
}

void BM_VerifySuiteSerial(benchmark::State& state) {
  const BatchOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(verify_suite_serial(bench_suite().suite, opt));
}
BENCHMARK(BM_VerifySuiteSerial)->Unit(benchmark::kMillisecond);

void BM_VerifySuiteParallel(benchmark::State& state) {
  const BatchOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(verify_suite(bench_suite().suite, opt, 0));
}
BENCHMARK(BM_VerifySuiteParallel)->Unit(benchmark::kMillisecond);

TheoremSpec theorem_spec() {
  TheoremSpec spec;
  spec.dataset.image_size = 32;
  spec.trials = 100;
  spec.datasets = 2;
  spec.smoothness_samples = 500;
  spec.metric_samples = 50;
  return spec;
}

void BM_TheoremSerial(benchmark::State& state) {
  const TheoremSpec spec = theorem_spec();
  for (auto _ : state) benchmark::DoNotOptimize(run_theorem_serial(spec));
}
BENCHMARK(BM_TheoremSerial)->Unit(benchmark::kMillisecond);

void BM_TheoremParallel(benchmark::State& state) {
  const TheoremSpec spec = theorem_spec();
  for (auto _ : state) benchmark::DoNotOptimize(run_theorem(spec, 0));
}
BENCHMARK(BM_TheoremParallel)->Unit(benchmark::kMillisecond);

void BM_NccSerial(benchmark::State& state) {
  Rng rng(3);
  const Image crop = vt::random_image(rng, 40, 40, 3), templ = vt::random_image(rng, 24, 24, 3);
  for (auto _ : state) benchmark::DoNotOptimize(exhaustive_ncc_flow_serial(templ, nullptr, crop));
}
BENCHMARK(BM_NccSerial)->Unit(benchmark::kMillisecond);

void BM_NccParallel(benchmark::State& state) {
  Rng rng(3);
  const Image crop = vt::random_image(rng, 40, 40, 3), templ = vt::random_image(rng, 24, 24, 3);
  for (auto _ : state) benchmark::DoNotOptimize(exhaustive_ncc_flow(templ, nullptr, crop, {}, 0));
}
BENCHMARK(BM_NccParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
