#pragma once

#include <string>

#include "verikit/core/image.hpp"

namespace verikit {

struct NccResult {
  double score = 0.0;        ///< Pearson correlation in [-1,1]; 0 when uninformative
  bool informative = false;  ///< false for < 2 samples or a zero-variance input
};

/// Normalized cross-correlation of two same-shape images, pooling every
/// channel of every counted pixel into one sample vector. `mask` selects the
/// counted pixels; nullptr counts all of them.
NccResult ncc(const Image& a, const Image& b, const Mask* mask = nullptr);

class DistanceMetric {
 public:
  enum class Kind { l_inf, l_p, ncc_distance };

  static DistanceMetric l_inf() { return DistanceMetric(Kind::l_inf, 0.0); }
  /// Throws ValidationError unless p >= 1.
  static DistanceMetric l_p(double p);
  /// 1 - ncc. Does not satisfy the triangle inequality in general.
  static DistanceMetric ncc_distance() { return DistanceMetric(Kind::ncc_distance, 0.0); }
  /// Parses "linf", "lp:<p>" (or "l2", "l1"), and "ncc".
  static DistanceMetric parse(const std::string& text);

  Kind kind() const noexcept { return kind_; }
  double p() const noexcept { return p_; }
  std::string name() const;

  bool operator==(const DistanceMetric&) const = default;

 private:
  DistanceMetric(Kind kind, double p) : kind_(kind), p_(p) {}
  Kind kind_;
  double p_;
};

/// Nonnegative distance between two same-shape images; throws
/// ValidationError on a shape mismatch.
double image_distance(const DistanceMetric& metric, const Image& a, const Image& b);

}  // namespace verikit
