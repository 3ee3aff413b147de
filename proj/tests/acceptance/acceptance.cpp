// Acceptance checks; one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "instances.hpp"
#include "support.hpp"
#include "verikit/cli/cli.hpp"
#include "verikit/eval/eval.hpp"
#include "verikit/eval/experiments.hpp"
#include "verikit/geometry/fundamental.hpp"
#include "verikit/geometry/ransac.hpp"
#include "verikit/io/suite_io.hpp"
#include "verikit/metrics/metrics.hpp"
#include "verikit/synth/suite.hpp"
#include "verikit/synth/theorem.hpp"
#include "verikit/verify/tests.hpp"

using namespace verikit;
namespace vt = verikit::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shared by criteria 1 and 2.
const TheoremReport& theorem_report(double* seconds = nullptr) {
  static double elapsed = 0.0;
  static const TheoremReport report = [] {
    TheoremSpec spec;
    spec.dataset.image_size = 64;
    spec.trials = 1000;
    spec.datasets = 10;
    spec.seed = 2024;
    const auto t0 = Clock::now();
    TheoremReport r = run_theorem(spec, 1);
    elapsed = seconds_since(t0);
    return r;
  }();
  if (seconds) *seconds = elapsed;
  return report;
}

Outcome criterion_theorem() {
  double secs = 0.0;
  const TheoremReport& r = theorem_report(&secs);
  if (!r.premises_ok) return {false, "premises failed"};
  bool ok = r.arms.size() == 3 && secs < 300.0;
  std::string d;
  for (const EstimatorArm& a : r.arms) {
    ok = ok && a.wrong_class_queries >= 1000 && a.false_positives == 0;
    d += fmt("%s %zu/%zu, ", estimator_name(a.estimator).c_str(), a.false_positives, a.wrong_class_queries);
  }
  return {ok, d + fmt("%.1f s single-threaded at 64x64", secs)};
}

Outcome criterion_recall() {
  const TheoremReport& r = theorem_report();
  for (const EstimatorArm& a : r.arms)
    if (a.estimator == EstimatorKind::ground_truth)
      return {a.recall() >= 0.95, fmt("recall %.4f (%zu/%zu)", a.recall(), a.correct_accepted, a.correct_class_queries)};
  return {false, "no ground_truth arm"};
}

// Shared by criteria 3 and 10.
const GeneratedSuite& fp_suite() {
  static const GeneratedSuite g = [] {
    SuiteSpec spec;
    spec.false_positive_rate = 0.5;
    spec.seed = 7;
    return make_detection_suite(spec);
  }();
  return g;
}

Outcome criterion_precision() {
  const GeneratedSuite& g = fp_suite();
  const PipelineResult p = run_pipeline(g.suite, BatchOptions{}, 0);
  const bool ok = p.base.max_precision < 0.8 && p.verified.max_precision == 1.0 && p.verified.map >= p.base.map;
  return {ok, fmt("%zu detections; base max precision %.4f, mAP %.4f; verified max precision %.4f, mAP %.4f",
                  p.base.num_detections, p.base.max_precision, p.base.map, p.verified.max_precision, p.verified.map)};
}

Outcome criterion_eight_point() {
  double worst_f = 0.0, worst_r = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const vt::CameraPair pair = vt::random_camera_pair(90000 + seed);
    const FundamentalMatrix f = eight_point(pair.matches);
    worst_f = std::max(worst_f, vt::sign_free_distance(f.matrix(), pair.f_true));
    for (const Correspondence& c : pair.matches) worst_r = std::max(worst_r, epipolar_distance(f, c));
  }
  return {worst_f < 1e-4 && worst_r < 1e-6, fmt("max |F - F*| %.3g, max Sampson residual %.3g", worst_f, worst_r)};
}

Outcome criterion_ransac() {
  RansacConfig cfg;
  cfg.epsilon = 1.0;
  cfg.iterations = 1000;
  cfg.max_count = 500;
  cfg.stride = 1;
  double homo_min = 1.0, corrupt_min = 1.0, corrupt_max = 0.0, random_max = 0.0, slowest = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(777 + seed);
    Eigen::Matrix3d h;
    h << rng.uniform(0.8, 1.2), rng.uniform(-0.2, 0.2), rng.uniform(5, 15), rng.uniform(-0.2, 0.2),
        rng.uniform(0.8, 1.2), rng.uniform(5, 15), rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3), 1.0;
    cfg.seed = seed;
    const FlowField clean = vt::homography_flow(h, 25, 20);  // 500 correspondences
    const auto t0 = Clock::now();
    homo_min = std::min(homo_min, f_inlier(clean, cfg));
    slowest = std::max(slowest, seconds_since(t0));

    FlowField corrupt = clean;
    std::vector<std::size_t> idx(clean.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < idx.size() / 2; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    for (std::size_t i = 0; i < idx.size() / 2; ++i)
      corrupt.set(static_cast<int>(idx[i] % 25), static_cast<int>(idx[i] / 25), rng.uniform(0, 64), rng.uniform(0, 64));
    const double c = f_inlier(corrupt, cfg);
    corrupt_min = std::min(corrupt_min, c);
    corrupt_max = std::max(corrupt_max, c);

    random_max = std::max(random_max, f_inlier(vt::random_flow(rng, 25, 20, 64, 64), cfg));
  }
  const bool ok = homo_min >= 0.99 && corrupt_min >= 0.45 && corrupt_max <= 0.60 && random_max < 0.5 &&
                  slowest < 0.050;
  return {ok, fmt("homography min %.4f, corrupted [%.4f, %.4f], random max %.4f, slowest %.1f ms at 500", homo_min,
                  corrupt_min, corrupt_max, random_max, slowest * 1e3)};
}

Outcome criterion_metric_axioms() {
  Rng rng(606);
  const std::vector<DistanceMetric> metrics = {DistanceMetric::l_inf(), DistanceMetric::l_p(1),
                                               DistanceMetric::l_p(2), DistanceMetric::l_p(3.5)};
  std::size_t triangle = 0, permutation = 0;
  const std::size_t triples = 10000;
  for (std::size_t i = 0; i < triples; ++i) {
    const Image a = vt::random_image(rng, 6, 5, 3), b = vt::random_image(rng, 6, 5, 3), c = vt::random_image(rng, 6, 5, 3);
    std::vector<std::size_t> perm(a.pixel_count());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng.index(k)]);
    auto permute = [&](const Image& img) {
      Image out(img.width(), img.height(), img.channels());
      for (std::size_t p = 0; p < perm.size(); ++p)
        for (int ch = 0; ch < img.channels(); ++ch)
          out.data()[perm[p] * 3 + static_cast<std::size_t>(ch)] = img.data()[p * 3 + static_cast<std::size_t>(ch)];
      return out;
    };
    const Image pa = permute(a), pb = permute(b);
    for (const DistanceMetric& m : metrics) {
      const double ab = image_distance(m, a, b), bc = image_distance(m, b, c), ac = image_distance(m, a, c);
      // rounding slack only: summation order changes the last bits
      if (ac > (ab + bc) * (1 + 1e-12)) ++triangle;
      if (std::abs(image_distance(m, pa, pb) - ab) > 1e-12 * std::max(1.0, ab)) ++permutation;
    }
  }
  return {triangle == 0 && permutation == 0,
          fmt("%zu triples x 4 metrics (linf, l1, l2, l3.5): %zu triangle, %zu permutation violations", triples,
              triangle, permutation)};
}

// Mean over recall levels k/G of the best precision of any cutoff with >= k hits.
double brute_force_ap(const std::vector<bool>& tp, std::size_t num_gt) {
  double sum = 0.0;
  for (std::size_t k = 1; k <= num_gt; ++k) {
    double best = 0.0;
    for (std::size_t cut = 1; cut <= tp.size(); ++cut) {
      const auto hits = static_cast<std::size_t>(std::count(tp.begin(), tp.begin() + static_cast<long>(cut), true));
      if (hits >= k) best = std::max(best, static_cast<double>(hits) / static_cast<double>(cut));
    }
    sum += best;
  }
  return sum / static_cast<double>(num_gt);
}

Outcome criterion_ap() {
  Rng rng(707);
  std::size_t instances = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t g = 1 + rng.index(3), n = rng.index(7);
    std::vector<GroundTruth> boxes;
    for (std::size_t k = 0; k < g; ++k) {
      const double x = rng.uniform(0, 30), y = rng.uniform(0, 30);
      boxes.push_back({{x, y, x + rng.uniform(8, 16), y + rng.uniform(8, 16)}, 0});
    }
    std::vector<RankedDetection> ranked;
    for (std::size_t i = 0; i < n; ++i) {
      const Box& near = boxes[rng.index(g)].box;
      ranked.push_back({0, {static_cast<std::int64_t>(i), 0, near.translated(rng.uniform(-5, 5), rng.uniform(-5, 5)),
                            rng.uniform()}, true});
    }
    ranked = base_ranking(ranked);
    // independent greedy matching in rank order
    std::vector<bool> tp;
    std::vector<bool> taken(g, false);
    for (const RankedDetection& r : ranked) {
      double best = -1;
      std::size_t arg = 0;
      for (std::size_t k = 0; k < g; ++k)
        if (!taken[k] && iou(r.detection.box, boxes[k].box) > best) best = iou(r.detection.box, boxes[k].box), arg = k;
      const bool hit = best >= 0.5;
      if (hit) taken[arg] = true;
      tp.push_back(hit);
    }
    const auto curve = average_precision(ranked, {{0, boxes}}, 0);
    if (!curve) return {false, "no curve for a class with ground truth"};
    worst = std::max(worst, std::abs(curve->ap - brute_force_ap(tp, g)));
    ++instances;
  }
  return {worst <= 1e-12, fmt("%zu micro-instances (<=6 detections, <=3 GT), max |AP - brute force| %.3g", instances, worst)};
}

Outcome criterion_monotonicity() {
  Rng rng(808);
  std::size_t thr = 0, add = 0, abl = 0, flips = 0;
  const std::size_t n = 1000;
  for (std::size_t seed = 0; seed < n; ++seed) {
    const vt::VerifyInstance inst = vt::random_verify_instance(200000 + seed);
    const bool base = inst.run().accepted;
    VerifyOptions up = inst.options;
    Thresholds& t = up.thresholds;
    t.alpha_rig = std::min(1.0, t.alpha_rig + rng.uniform(0, 0.2));
    t.alpha_color = std::min(1.0, t.alpha_color + rng.uniform(0, 0.2));
    t.alpha_prec = std::min(1.0, t.alpha_prec + rng.uniform(0, 0.2));
    t.alpha_rec = std::min(1.0, t.alpha_rec + rng.uniform(0, 0.2));
    t.eta_diff = std::min(1.0, t.eta_diff + rng.uniform(0, 0.2));
    t.eta_iou = std::max(0.0, t.eta_iou - rng.uniform(0, 0.2));
    const bool stricter = inst.run(up).accepted;
    if (stricter && !base) ++thr;
    if (base && !stricter) ++flips;
    bool prev = false;
    for (std::size_t k = 1; k <= inst.templates.size(); ++k) {
      const auto v = inst.views(k);
      const bool now = flow_verify(inst.detection, v, inst.crop, inst.all, inst.options).accepted;
      if (prev && !now) ++add;
      prev = now;
    }
    for (VerifyTest test : kAllTests) {
      VerifyOptions less = inst.options;
      less.enabled = less.enabled.without(test);
      if (base && !inst.run(less).accepted) ++abl;
    }
  }
  return {thr == 0 && add == 0 && abl == 0 && flips > 0,
          fmt("%zu instances: %zu threshold, %zu template-adding, %zu ablation violations (%zu flips under stricter thresholds)",
              n, thr, add, abl, flips)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome criterion_jobs() {
  const fs::path root = fs::temp_directory_path() / ("verikit_acceptance_" + std::to_string(Rng(Clock::now().time_since_epoch().count()).next()));
  fs::create_directories(root);
  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args) { return cli::run(args, sink, sink); };
  bool ok = run({"synth", "--out", (root / "suite").string(), "--num-scenes", "3", "--seed", "5"}) == 0;
  std::vector<std::string> files;
  for (const char* jobs : {"1", "8"}) {
    const std::string out = (root / (std::string("j") + jobs)).string();
    ok = ok && run({"verify", "--suite", (root / "suite").string(), "--out", out + "/v", "--jobs", jobs}) == 0;
    ok = ok && run({"eval", "--reports", out + "/v/reports.jsonl", "--suite", (root / "suite").string(), "--out",
                    out + "/e", "--jobs", jobs}) == 0;
    ok = ok && run({"theorem", "--out", out + "/t", "--trials", "100", "--image-size", "32", "--jobs", jobs}) == 0;
  }
  std::size_t compared = 0, differ = 0;
  for (const char* f : {"v/reports.jsonl", "v/summary.json", "e/metrics.csv", "e/pr.csv", "e/summary.json", "t/theorem.json"}) {
    ++compared;
    if (slurp(root / "j1" / f) != slurp(root / "j8" / f) || slurp(root / "j1" / f).empty()) ++differ;
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  return {ok && differ == 0, fmt("%zu outputs compared at --jobs 1 and 8, %zu differ%s", compared, differ,
                                 ok ? "" : " (a run failed)")};
}

Outcome criterion_ablation() {
  const auto rows = ablation(fp_suite().suite, VerifyOptions{}, 0);
  double full = 0.0, inlier_drop = -1.0, other_drop = -1.0;
  std::string d;
  for (const AblationRow& r : rows) {
    if (r.removed == "none") full = r.max_precision;
    d += fmt("%s %.4f, ", r.removed.c_str(), r.max_precision);
  }
  for (const AblationRow& r : rows) {
    if (r.removed == "none") continue;
    (r.removed == "f_inlier" ? inlier_drop : other_drop) =
        std::max(r.removed == "f_inlier" ? inlier_drop : other_drop, full - r.max_precision);
  }
  return {inlier_drop > 0.0 && inlier_drop > other_drop,
          d + fmt("f_inlier drop %.4f vs next largest %.4f", inlier_drop, other_drop)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"theorem check: zero wrong-class acceptances", criterion_theorem},
      {"ground-truth-flow correct-class recall >= 0.95", criterion_recall},
      {"50% false-positive suite precision and mAP", criterion_precision},
      {"eight-point recovery on 100 camera pairs", criterion_eight_point},
      {"ransac inlier fractions and runtime", criterion_ransac},
      {"l_inf and l_p metric axioms", criterion_metric_axioms},
      {"average precision against brute force", criterion_ap},
      {"verification monotonicity", criterion_monotonicity},
      {"reports independent of --jobs", criterion_jobs},
      {"f_inlier ablation drop is the largest", criterion_ablation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%zu] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
