#include <gtest/gtest.h>

#include "instances.hpp"
#include "verikit/core/warp.hpp"
#include "verikit/synth/suite.hpp"
#include "verikit/util/error.hpp"
#include "verikit/verify/batch.hpp"
#include "verikit/verify/flow_verify.hpp"

using namespace verikit;
namespace vt = verikit::testing;

namespace {

void expect_flags_consistent(const FlowVerifyResult& r, const Thresholds& th) {
  for (const TestScores& s : r.templates) {
    EXPECT_EQ(s.sim_pass, s.sim_score > th.eta_diff);
    EXPECT_GE(s.sim_score, 0.0);
    EXPECT_LE(s.sim_score, 1.0);
    auto check = [](const std::optional<double>& v, bool flag, double alpha) {
      if (!v) {
        EXPECT_FALSE(flag);
        return;
      }
      EXPECT_GE(*v, 0.0);
      EXPECT_LE(*v, 1.0);
      EXPECT_EQ(flag, *v > alpha);
    };
    check(s.f_color, s.color_pass, th.alpha_color);
    check(s.f_inlier, s.inlier_pass, th.alpha_rig);
    check(s.f_precision, s.precision_pass, th.alpha_prec);
    check(s.f_recall, s.recall_pass, th.alpha_rec);
  }
}

}  // namespace

TEST(SimScore, MarginOverOverlappingOtherClasses) {
  const Detection d{1, 0, {0, 0, 10, 10}, 0.8};
  std::vector<Detection> all = {d};
  EXPECT_EQ(sim_score(d, all, 0.5), 1.0);
  all.push_back({2, 1, {0, 0, 10, 10}, 0.6});
  EXPECT_NEAR(sim_score(d, all, 0.5), 0.2, 1e-12);
  all.push_back({3, 2, {1, 0, 11, 10}, 0.9});
  EXPECT_EQ(sim_score(d, all, 0.5), 0.0);
  // same class and low-overlap detections are ignored
  all = {d, {4, 0, {0, 0, 10, 10}, 0.99}, {5, 1, {8, 8, 18, 18}, 0.99}};
  EXPECT_EQ(sim_score(d, all, 0.5), 1.0);
}

TEST(SimScore, EqualConfidenceFailsAtZeroEta) {
  const Detection d{1, 0, {0, 0, 10, 10}, 0.7};
  const std::vector<Detection> all = {d, {2, 1, {0, 0, 10, 10}, 0.7}};
  const double s = sim_score(d, all, 0.5);
  EXPECT_EQ(s, 0.0);
  EXPECT_FALSE(s > Thresholds{}.eta_diff);
}

TEST(FColor, PerfectWarpScoresOne) {
  Rng rng(1);
  const Image crop = vt::smooth_texture(rng, 20, 3);
  const Image templ = crop;
  const ColorScore c = f_color(templ, FlowField::identity(20, 20), crop);
  EXPECT_TRUE(c.ncc_informative);
  EXPECT_NEAR(c.score, 1.0, 1e-6);
  EXPECT_THROW(f_color(Image(20, 20, 1), FlowField::identity(20, 20), crop), ValidationError);
}

TEST(FColor, NothingWrittenIsNeutral) {
  const Image crop(8, 8, 3, 0.5f);
  FlowField off(4, 4);
  off.set(0, 0, 100, 100);
  const ColorScore c = f_color(Image(4, 4, 3), off, crop);
  EXPECT_FALSE(c.ncc_informative);
  EXPECT_EQ(c.score, 0.5);
}

TEST(FPrecisionRecall, KnownConfigurations) {
  FlowField f(2, 2);
  f.set(0, 0, 1, 1);
  f.set(1, 0, 5, 1);
  f.set(0, 1, 1, 5);
  f.set(1, 1, 20, 20);
  const Box box{0, 0, 5, 5};
  EXPECT_DOUBLE_EQ(f_precision(f, box), 0.75);  // boundary counts as inside
  EXPECT_DOUBLE_EQ(f_recall(f, box), iou({1, 1, 20, 20}, box));
  EXPECT_EQ(f_precision(FlowField(2, 2), box), 0.0);
  EXPECT_EQ(f_recall(FlowField(2, 2), box), 0.0);
}

TEST(TestSet, ParseAndNames) {
  EXPECT_EQ(TestSet::parse("sim,f_color,f_inlier,f_precision,f_recall"), TestSet::all());
  EXPECT_EQ(TestSet::parse("FInlier, f-color"), TestSet::none().with(VerifyTest::f_inlier).with(VerifyTest::f_color));
  EXPECT_EQ(TestSet::all().without(VerifyTest::sim).names(),
            (std::vector<std::string>{"f_color", "f_inlier", "f_precision", "f_recall"}));
  EXPECT_THROW(TestSet::parse("f_shape"), ValidationError);
}

TEST(Thresholds, Validation) {
  Thresholds t;
  EXPECT_NO_THROW(t.validate());
  t.alpha_rig = 1.5;
  EXPECT_THROW(t.validate(), ValidationError);
  t = {};
  t.eta_iou = -0.1;
  EXPECT_THROW(t.validate(), ValidationError);
}

TEST(FlowVerify, MissingFlowRejectsWithReason) {
  vt::VerifyInstance inst = vt::random_verify_instance(4);
  auto views = inst.views();
  views[0].flow = nullptr;
  const FlowVerifyResult r = flow_verify(inst.detection, views, inst.crop, inst.all, inst.options);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, "missing-flow");
  EXPECT_TRUE(r.templates[0].flow_missing);
  const FlowVerifyResult none = flow_verify(inst.detection, {}, inst.crop, inst.all, inst.options);
  EXPECT_EQ(none.reason, "no-templates");
  EXPECT_FALSE(none.accepted);
}

TEST(FlowVerify, FlowShapeMismatchThrows) {
  vt::VerifyInstance inst = vt::random_verify_instance(5);
  const FlowField wrong(3, 3);
  auto views = inst.views();
  views[0].flow = &wrong;
  EXPECT_THROW(flow_verify(inst.detection, views, inst.crop, inst.all, inst.options), ValidationError);
}

TEST(FlowVerify, ShortCircuitAndFullModesAgree) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    vt::VerifyInstance inst = vt::random_verify_instance(seed);
    VerifyOptions full = inst.options;
    full.mode = ScoreMode::full;
    const FlowVerifyResult a = inst.run(), b = inst.run(full);
    EXPECT_EQ(a.accepted, b.accepted) << seed;
    EXPECT_EQ(a.best_template, b.best_template) << seed;
    expect_flags_consistent(a, inst.options.thresholds);
    expect_flags_consistent(b, inst.options.thresholds);
    for (const TestScores& s : b.templates) {
      EXPECT_TRUE(s.f_color && s.f_inlier && s.f_precision && s.f_recall);
    }
  }
}

TEST(FlowVerify, BestTemplateHasLargestProduct) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const vt::VerifyInstance inst = vt::random_verify_instance(seed);
    const FlowVerifyResult r = inst.run();
    if (!r.accepted) continue;
    const double best = r.templates[*r.best_template].score_product();
    for (std::size_t k = 0; k < r.templates.size(); ++k) {
      if (!r.templates[k].passed) continue;
      EXPECT_LE(r.templates[k].score_product(), best);
      if (k < *r.best_template) {
        EXPECT_LT(r.templates[k].score_product(), best);
      }
    }
  }
}

TEST(FlowVerify, ReapplyEqualsFreshFullRun) {
  Rng rng(99);
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    vt::VerifyInstance inst = vt::random_verify_instance(seed);
    inst.options.mode = ScoreMode::full;
    const FlowVerifyResult base = inst.run();
    VerifyOptions other = inst.options;
    other.thresholds.alpha_rig = rng.uniform(0.3, 0.99);
    other.thresholds.alpha_color = rng.uniform(0.3, 0.99);
    other.thresholds.eta_iou = rng.uniform(0.1, 0.9);
    if (rng.bernoulli(0.5)) other.enabled = other.enabled.without(VerifyTest::f_recall);
    const double sim = sim_score(inst.detection, inst.all, other.thresholds.eta_iou);
    const FlowVerifyResult a = reapply_thresholds(base, sim, other.thresholds, other.enabled);
    const FlowVerifyResult b = inst.run(other);
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_EQ(a.best_template, b.best_template);
    ASSERT_EQ(a.templates.size(), b.templates.size());
    for (std::size_t k = 0; k < a.templates.size(); ++k) EXPECT_EQ(a.templates[k].passed, b.templates[k].passed);
  }
}

TEST(FlowVerify, ReapplyNeedsFullScores) {
  const vt::VerifyInstance inst = vt::random_verify_instance(3);
  FlowVerifyResult r = inst.run();
  r.templates[0].f_color.reset();
  r.reason = "rejected";
  EXPECT_THROW(reapply_thresholds(r, 1.0, Thresholds{}, TestSet::all()), ValidationError);
}

TEST(Monotonicity, RaisingThresholdsNeverAccepts) {
  Rng rng(7);
  std::size_t violations = 0, flipped = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const vt::VerifyInstance inst = vt::random_verify_instance(1000 + seed);
    const bool before = inst.run().accepted;
    VerifyOptions up = inst.options;
    Thresholds& t = up.thresholds;
    switch (rng.index(6)) {
      case 0: t.alpha_rig = std::min(1.0, t.alpha_rig + rng.uniform(0, 0.3)); break;
      case 1: t.alpha_color = std::min(1.0, t.alpha_color + rng.uniform(0, 0.3)); break;
      case 2: t.alpha_prec = std::min(1.0, t.alpha_prec + rng.uniform(0, 0.3)); break;
      case 3: t.alpha_rec = std::min(1.0, t.alpha_rec + rng.uniform(0, 0.3)); break;
      case 4: t.eta_diff = std::min(1.0, t.eta_diff + rng.uniform(0, 0.3)); break;
      default: t.eta_iou = std::max(0.0, t.eta_iou - rng.uniform(0, 0.3)); break;  // stricter overlap
    }
    const bool after = inst.run(up).accepted;
    if (!before && after) ++violations;
    if (before && !after) ++flipped;
  }
  EXPECT_EQ(violations, 0u);
  EXPECT_GT(flipped, 0u);
}

TEST(Monotonicity, AddingTemplatesAndRemovingTestsNeverRejects) {
  std::size_t violations = 0, accepted = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const vt::VerifyInstance inst = vt::random_verify_instance(5000 + seed);
    bool prev = false;
    for (std::size_t n = 1; n <= inst.templates.size(); ++n) {
      const auto v = inst.views(n);
      const bool now = flow_verify(inst.detection, v, inst.crop, inst.all, inst.options).accepted;
      if (prev && !now) ++violations;
      prev = now;
    }
    const bool full = inst.run().accepted;
    accepted += full ? 1 : 0;
    for (VerifyTest t : kAllTests) {
      VerifyOptions less = inst.options;
      less.enabled = less.enabled.without(t);
      if (full && !inst.run(less).accepted) ++violations;
    }
  }
  EXPECT_EQ(violations, 0u);
  EXPECT_GT(accepted, 20u);
  EXPECT_LT(accepted, 180u);
}

TEST(Batch, EquallySpaced) {
  EXPECT_EQ(equally_spaced(15, 3), (std::vector<std::size_t>{0, 5, 10}));
  EXPECT_EQ(equally_spaced(15, 15).size(), 15u);
  EXPECT_EQ(equally_spaced(10, 4), (std::vector<std::size_t>{0, 2, 5, 7}));
  EXPECT_THROW(equally_spaced(5, 0), ValidationError);
  EXPECT_THROW(equally_spaced(5, 6), ValidationError);
}

TEST(Batch, ParallelMatchesSerialAndReportsEmptyCrops) {
  SuiteSpec spec;
  spec.num_scenes = 2;
  spec.templates_per_class = 6;
  spec.seed = 11;
  GeneratedSuite g = make_detection_suite(spec);
  // a detection outside its scene has no crop
  Detection far = g.suite.scenes[0].detections[0];
  far.detection_id = 9999;
  far.box = far.box.translated(5000, 5000);
  g.suite.scenes[0].detections.push_back(far);
  BatchOptions opt;
  opt.verify.ransac.iterations = 100;
  const auto serial = verify_suite_serial(g.suite, opt);
  const auto parallel = verify_suite(g.suite, opt, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].detection, parallel[i].detection);
    EXPECT_EQ(serial[i].result.accepted, parallel[i].result.accepted);
    EXPECT_EQ(serial[i].result.reason, parallel[i].result.reason);
  }
  const auto it = std::find_if(serial.begin(), serial.end(),
                               [](const DetectionReport& r) { return r.detection.detection_id == 9999; });
  ASSERT_NE(it, serial.end());
  EXPECT_EQ(it->result.reason, "empty-crop");
}

TEST(Batch, MissingFlowsAreCounted) {
  SuiteSpec spec;
  spec.num_scenes = 1;
  spec.templates_per_class = 4;
  GeneratedSuite g = make_detection_suite(spec);
  const FlowKey drop = g.suite.scenes[0].flows.begin()->first;
  g.suite.scenes[0].flows.erase(drop);
  BatchOptions opt;
  opt.verify.ransac.iterations = 50;
  const auto reports = verify_suite(g.suite, opt, 1);
  EXPECT_EQ(missing_flow_count(reports), 1u);
  for (const DetectionReport& r : reports)
    if (r.detection.detection_id == drop.detection_id) {
      EXPECT_EQ(r.result.reason, "missing-flow");
    }
}
