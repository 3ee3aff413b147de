#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "verikit/core/box.hpp"
#include "verikit/core/detection.hpp"
#include "verikit/core/flow.hpp"
#include "verikit/core/image.hpp"
#include "verikit/geometry/ransac.hpp"

namespace verikit {

/// Acceptance thresholds; defaults are the validation-tuned values.
struct Thresholds {
  double alpha_rig = 0.9;
  double alpha_color = 0.5;
  double alpha_prec = 0.9;
  double alpha_rec = 0.3;
  double eta_diff = 0.0;
  double eta_iou = 0.5;

  void validate() const;
  /// (alpha_rig, alpha_color, alpha_prec, alpha_rec, eta_diff, eta_iou)
  std::array<double, 6> as_array() const noexcept {
    return {alpha_rig, alpha_color, alpha_prec, alpha_rec, eta_diff, eta_iou};
  }
  bool operator==(const Thresholds&) const = default;
};

enum class VerifyTest : std::uint8_t { sim = 0, f_color, f_inlier, f_precision, f_recall };

inline constexpr std::array<VerifyTest, 5> kAllTests = {
    VerifyTest::sim, VerifyTest::f_color, VerifyTest::f_inlier, VerifyTest::f_precision,
    VerifyTest::f_recall};

std::string test_name(VerifyTest t);
/// Accepts "sim", "f_color", "f_inlier", "f_precision", "f_recall" (and the
/// hyphenated / capitalized forms such as "FInlier").
VerifyTest parse_test(const std::string& name);

/// Set of enabled tests; the default is all five.
class TestSet {
 public:
  TestSet() : bits_(0x1f) {}
  static TestSet all() { return TestSet(); }
  static TestSet none() { return TestSet(0); }
  /// Comma-separated list of test names.
  static TestSet parse(const std::string& list);

  bool contains(VerifyTest t) const noexcept { return (bits_ >> static_cast<int>(t)) & 1u; }
  TestSet with(VerifyTest t) const noexcept { return TestSet(bits_ | bit(t)); }
  TestSet without(VerifyTest t) const noexcept { return TestSet(bits_ & ~bit(t)); }
  std::vector<std::string> names() const;

  bool operator==(const TestSet&) const = default;

 private:
  explicit TestSet(std::uint8_t bits) : bits_(bits) {}
  static std::uint8_t bit(VerifyTest t) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<int>(t));
  }
  std::uint8_t bits_;
};

/// Confidence margin over overlapping detections of other classes: 1 when no
/// other-class detection has IoU >= eta_iou with the target, otherwise
/// min over those of max(0, c(target) - c(other)). The target is matched by
/// detection_id and skipped.
double sim_score(const Detection& target, std::span<const Detection> all_detections,
                 double eta_iou);

struct ColorScore {
  double score = 0.5;
  bool ncc_informative = false;
};

/// (ncc(T(template), crop) + 1) / 2 over the crop pixels written by the warp.
ColorScore f_color(const Image& templ, const FlowField& flow, const Image& crop);

/// RANSAC inlier fraction of the flow's correspondences under cfg.
double f_inlier(const FlowField& flow, const RansacConfig& cfg);

/// Fraction of valid flow targets inside box_in_crop (boundary-inclusive).
double f_precision(const FlowField& flow, const Box& box_in_crop);

/// IoU between the tight box around all valid flow targets and box_in_crop.
double f_recall(const FlowField& flow, const Box& box_in_crop);

}  // namespace verikit
