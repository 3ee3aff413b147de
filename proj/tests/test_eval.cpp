#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "verikit/eval/eval.hpp"
#include "verikit/eval/sift.hpp"
#include "verikit/util/error.hpp"
#include "verikit/util/rng.hpp"

using namespace verikit;

namespace {

// Independent AP: mean over recall levels k/G of the best precision reached
// by any prefix holding at least k true positives.
double oracle_ap(const std::vector<bool>& tp, std::size_t num_gt) {
  double sum = 0.0;
  for (std::size_t k = 1; k <= num_gt; ++k) {
    double best = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < tp.size(); ++i) {
      hits += tp[i] ? 1 : 0;
      if (hits >= k) best = std::max(best, static_cast<double>(hits) / static_cast<double>(i + 1));
    }
    sum += best;
  }
  return sum / static_cast<double>(num_gt);
}

// Greedy matching written out per detection without shared state tricks.
std::vector<bool> oracle_match(const std::vector<RankedDetection>& ranked,
                               const std::vector<GroundTruth>& gt, int cls, double thr) {
  std::vector<int> taken(gt.size(), 0);
  std::vector<bool> out;
  for (const RankedDetection& r : ranked) {
    if (r.detection.class_id != cls) continue;
    int arg = -1;
    double best = -1.0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (gt[g].class_id != cls || taken[g]) continue;
      const double v = iou(r.detection.box, gt[g].box);
      if (v > best) best = v, arg = static_cast<int>(g);
    }
    const bool hit = arg >= 0 && best >= thr;
    if (hit) taken[static_cast<std::size_t>(arg)] = 1;
    out.push_back(hit);
  }
  return out;
}

Box gt_box(std::size_t k) { return {100.0 * static_cast<double>(k), 0, 100.0 * static_cast<double>(k) + 20, 20}; }

}  // namespace

TEST(AveragePrecision, KnownValues) {
  GroundTruthByScene gt{{0, {{gt_box(0), 1}, {gt_box(1), 1}}}};
  std::vector<RankedDetection> ranked = {{0, {1, 1, gt_box(0), 0.9}, true},
                                         {0, {2, 1, {500, 500, 520, 520}, 0.8}, true},
                                         {0, {3, 1, gt_box(1), 0.7}, true}};
  const auto c = average_precision(ranked, gt, 1);
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->ap, 0.5 * 1.0 + 0.5 * (2.0 / 3.0), 1e-15);
  EXPECT_EQ(c->max_precision, 1.0);
  EXPECT_EQ(c->true_positive, (std::vector<bool>{true, false, true}));
  EXPECT_FALSE(average_precision(ranked, gt, 2));
  EXPECT_EQ(average_precision({}, gt, 1)->ap, 0.0);
}

TEST(AveragePrecision, DuplicateDetectionIsFalsePositive) {
  GroundTruthByScene gt{{0, {{gt_box(0), 1}}}};
  std::vector<RankedDetection> ranked = {{0, {1, 1, gt_box(0), 0.9}, true},
                                         {0, {2, 1, gt_box(0), 0.8}, true}};
  EXPECT_EQ(match_detections(ranked, gt, 1), (std::vector<bool>{true, false}));
  // scene ids keep identical boxes apart
  gt[1] = {{gt_box(0), 1}};
  ranked[1].scene_id = 1;
  EXPECT_EQ(match_detections(ranked, gt, 1), (std::vector<bool>{true, true}));
}

TEST(AveragePrecision, ExhaustiveTruePositivePatterns) {
  std::size_t checked = 0;
  for (std::size_t n = 0; n <= 6; ++n)
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      const std::size_t hits = static_cast<std::size_t>(__builtin_popcount(mask));
      for (std::size_t g = std::max<std::size_t>(hits, 1); g <= 3; ++g) {
        GroundTruthByScene gt;
        for (std::size_t k = 0; k < g; ++k) gt[0].push_back({gt_box(k), 0});
        std::vector<RankedDetection> ranked;
        std::vector<bool> tp;
        std::size_t next = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const bool hit = (mask >> i) & 1u;
          const Box b = hit ? gt_box(next++) : Box{1000.0 + 50.0 * i, 0, 1020.0 + 50.0 * i, 20};
          ranked.push_back({0, {static_cast<std::int64_t>(i), 0, b, 1.0 - 0.1 * i}, true});
          tp.push_back(hit);
        }
        const auto c = average_precision(ranked, gt, 0);
        ASSERT_TRUE(c);
        ASSERT_EQ(c->true_positive, tp);
        EXPECT_NEAR(c->ap, oracle_ap(tp, g), 1e-12) << "n=" << n << " mask=" << mask << " g=" << g;
        ++checked;
      }
    }
  EXPECT_EQ(checked, 189u);
}

TEST(AveragePrecision, RandomMicroInstancesMatchOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t g = 1 + rng.index(3), n = rng.index(7);
    std::vector<GroundTruth> boxes;
    for (std::size_t k = 0; k < g; ++k) {
      const double x = rng.uniform(0, 40), y = rng.uniform(0, 40);
      boxes.push_back({{x, y, x + rng.uniform(8, 20), y + rng.uniform(8, 20)}, static_cast<int>(rng.index(2))});
    }
    std::vector<RankedDetection> ranked;
    for (std::size_t i = 0; i < n; ++i) {
      const Box& near = boxes[rng.index(g)].box;
      const double dx = rng.uniform(-6, 6), dy = rng.uniform(-6, 6);
      ranked.push_back({0, {static_cast<std::int64_t>(i), static_cast<int>(rng.index(2)), near.translated(dx, dy), rng.uniform()}, true});
    }
    ranked = base_ranking(ranked);
    GroundTruthByScene gt{{0, boxes}};
    for (int cls = 0; cls < 2; ++cls) {
      const std::vector<bool> tp = oracle_match(ranked, boxes, cls, 0.5);
      ASSERT_EQ(match_detections(ranked, gt, cls), tp);
      const std::size_t num = static_cast<std::size_t>(
          std::count_if(boxes.begin(), boxes.end(), [&](const GroundTruth& b) { return b.class_id == cls; }));
      const auto c = average_precision(ranked, gt, cls);
      if (num == 0) {
        EXPECT_FALSE(c);
        continue;
      }
      ASSERT_TRUE(c);
      EXPECT_NEAR(c->ap, oracle_ap(tp, num), 1e-12);
    }
  }
}

TEST(AveragePrecision, DemotingFalsePositivesNeverLowersAp) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<GroundTruth> boxes;
    for (std::size_t k = 0; k < 3; ++k) boxes.push_back({gt_box(k), 0});
    std::vector<RankedDetection> ranked;
    for (std::size_t i = 0; i < 6; ++i) {
      const Box b = rng.bernoulli(0.5) ? gt_box(rng.index(3)).translated(rng.uniform(-3, 3), 0)
                                       : Box{900, 0, 920, 20};
      ranked.push_back({0, {static_cast<std::int64_t>(i), 0, b, rng.uniform()}, true});
    }
    GroundTruthByScene gt{{0, boxes}};
    const auto base = base_ranking(ranked);
    const std::vector<bool> tp = match_detections(base, gt, 0);
    std::vector<RankedDetection> gated = base;
    for (std::size_t i = 0; i < gated.size(); ++i)
      gated[i].accepted = tp[i] || rng.bernoulli(0.3);
    const double before = average_precision(base, gt, 0)->ap;
    const double after = average_precision(rerank(gated), gt, 0)->ap;
    EXPECT_GE(after, before - 1e-15);
  }
}

TEST(Rerank, AcceptedFirstThenConfidence) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> dets;
    std::vector<char> flags;
    const std::size_t n = rng.index(12);
    for (std::size_t i = 0; i < n; ++i) {
      dets.push_back({static_cast<std::int64_t>(rng.index(5)), 0, gt_box(0), std::round(rng.uniform() * 4) / 4});
      flags.push_back(rng.bernoulli(0.5));
    }
    std::vector<bool> bits(flags.begin(), flags.end());
    std::unique_ptr<bool[]> raw(new bool[n]);
    for (std::size_t i = 0; i < n; ++i) raw[i] = bits[i];
    const auto out = rerank(dets, std::span<const bool>(raw.get(), n));
    ASSERT_EQ(out.size(), n);
    for (std::size_t i = 1; i < out.size(); ++i) {
      EXPECT_FALSE(rank_before(out[i], out[i - 1]));
      if (out[i].accepted == out[i - 1].accepted)
        EXPECT_LE(out[i].detection.confidence, out[i - 1].detection.confidence);
      else
        EXPECT_TRUE(out[i - 1].accepted);
    }
    EXPECT_EQ(rerank(out).size(), out.size());
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(rerank(out)[i].detection, out[i].detection);
    std::size_t acc = 0;
    for (const auto& r : out) acc += r.accepted ? 1 : 0;
    EXPECT_EQ(acc, static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1)));
  }
  const std::vector<Detection> two(2);
  const bool one_flag[1] = {true};
  EXPECT_THROW(rerank(two, std::span<const bool>(one_flag, 1)), ValidationError);
}

TEST(Rerank, TiesBreakOnDetectionThenScene) {
  const Detection a{4, 0, gt_box(0), 0.5}, b{2, 0, gt_box(0), 0.5};
  const auto out = rerank({{1, a, true}, {0, a, true}, {3, b, true}});
  EXPECT_EQ(out[0].detection.detection_id, 2);
  EXPECT_EQ(out[1].scene_id, 0);
  EXPECT_EQ(out[2].scene_id, 1);
}

TEST(MeanAp, PooledMaxPrecisionMatchesPrefixOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    GroundTruthByScene gt;
    std::vector<RankedDetection> items;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < 2; ++k) gt[s].push_back({gt_box(k), static_cast<int>(rng.index(3))});
      for (std::size_t i = 0; i < 3; ++i) {
        const Box b = rng.bernoulli(0.6) ? gt_box(rng.index(2)) : Box{700, 0, 720, 20};
        items.push_back({s, {static_cast<std::int64_t>(10 * s + i), static_cast<int>(rng.index(3)), b, rng.uniform()},
                         rng.bernoulli(0.7)});
      }
    }
    const auto ranked = rerank(items);
    const EvalSummary e = mean_ap(ranked, gt);
    std::vector<bool> tp(ranked.size());
    double map = 0.0;
    int classes = 0;
    for (int c = 0; c < 3; ++c) {
      std::vector<RankedDetection> mine;
      std::vector<std::size_t> pos;
      for (std::size_t i = 0; i < ranked.size(); ++i)
        if (ranked[i].detection.class_id == c) mine.push_back(ranked[i]), pos.push_back(i);
      const auto m = match_detections(mine, gt, c);
      for (std::size_t k = 0; k < pos.size(); ++k) tp[pos[k]] = m[k];
      if (auto curve = average_precision(ranked, gt, c)) map += curve->ap, ++classes;
    }
    double best = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < tp.size(); ++i) {
      hits += tp[i] ? 1 : 0;
      best = std::max(best, static_cast<double>(hits) / static_cast<double>(i + 1));
    }
    EXPECT_DOUBLE_EQ(e.max_precision, best);
    EXPECT_NEAR(e.map, classes ? map / classes : 0.0, 1e-15);
    EXPECT_EQ(e.curve.size(), ranked.size());
  }
}

TEST(Sift, PassesOnEnoughPreciseMatches) {
  const Box box{0, 0, 10, 10};
  std::vector<Correspondence> good, few, loose;
  for (int i = 0; i < 40; ++i) good.push_back({Vec2(i, 0), Vec2(i % 10, 5)});
  for (int i = 0; i < 30; ++i) few.push_back({Vec2(i, 0), Vec2(1, 1)});
  for (int i = 0; i < 40; ++i) loose.push_back({Vec2(i, 0), Vec2(i < 32 ? 1 : 50, 1)});
  const std::vector<std::vector<Correspondence>> sets = {few, loose, good};
  const SiftResult r = sift_verify(sets, box);
  EXPECT_TRUE(r.accepted);
  EXPECT_FALSE(r.templates[0].passed);  // exactly s_matches_min is not enough
  EXPECT_FALSE(r.templates[1].passed);
  EXPECT_DOUBLE_EQ(r.templates[1].precision, 0.8);
  EXPECT_EQ(r.best_template, 2u);
  EXPECT_FALSE(sift_verify(std::span<const std::vector<Correspondence>>(sets.data(), 2), box).accepted);
}
