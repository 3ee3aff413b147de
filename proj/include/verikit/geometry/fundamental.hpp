#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

#include "verikit/geometry/homography.hpp"

namespace verikit {

/// One (pixel, T(pixel)) pair.
struct Correspondence {
  Vec2 src;
  Vec2 dst;
};

/// Rank-2 3x3 matrix with unit Frobenius norm and x'^T F x = 0 on matches.
class FundamentalMatrix {
 public:
  /// Projects `m` to rank 2, then Frobenius-normalizes and fixes the sign so
  /// the largest-magnitude entry is positive. Throws ValidationError for a
  /// zero matrix.
  static FundamentalMatrix from_matrix(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }

 private:
  explicit FundamentalMatrix(const Eigen::Matrix3d& m) : m_(m) {}
  Eigen::Matrix3d m_;
};

/// Normalized 8-point estimate from >= 8 correspondences. Throws
/// ValidationError("underdetermined") below 8 correspondences and
/// ValidationError("degenerate configuration") for coincident points or a
/// design matrix of numerical rank below 6.
FundamentalMatrix eight_point(std::span<const Correspondence> corrs);

/// Non-throwing form used inside sampling loops.
std::optional<FundamentalMatrix> try_eight_point(std::span<const Correspondence> corrs) noexcept;

/// Square root of the Sampson error, in pixels. +infinity when every
/// derivative term vanishes.
double epipolar_distance(const FundamentalMatrix& f, const Correspondence& c) noexcept;

}  // namespace verikit
