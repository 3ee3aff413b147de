#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>

namespace verikit {

using Vec2 = Eigen::Vector2d;

/// Invertible projective map of the plane, stored with h33 = 1 when h33 != 0.
class Homography {
 public:
  Homography() : h_(Eigen::Matrix3d::Identity()) {}
  /// Throws ValidationError when |det| is numerically zero.
  explicit Homography(const Eigen::Matrix3d& h);

  static Homography identity() { return Homography(); }
  static Homography translation(double tx, double ty);
  static Homography scaling(double sx, double sy);
  /// p' = scale * R(rotation) * (p - center) + center + translation.
  static Homography similarity(double rotation, double scale, const Vec2& center,
                               const Vec2& translation);
  /// Exact map taking each src corner to the matching dst corner (DLT).
  /// Throws ValidationError for a degenerate quadrilateral.
  static Homography from_correspondences(const std::array<Vec2, 4>& src,
                                         const std::array<Vec2, 4>& dst);

  const Eigen::Matrix3d& matrix() const noexcept { return h_; }

  /// Throws ValidationError("point at infinity") when |w| < 1e-12.
  Vec2 apply(const Vec2& p) const;
  std::optional<Vec2> try_apply(const Vec2& p) const noexcept;

  Homography inverse() const;
  /// (a * b)(p) = a(b(p)).
  friend Homography operator*(const Homography& a, const Homography& b) {
    return Homography(a.h_ * b.h_);
  }

 private:
  Eigen::Matrix3d h_;
};

}  // namespace verikit
