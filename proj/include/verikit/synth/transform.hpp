#pragma once

#include <array>
#include <cstdint>

#include "verikit/core/image.hpp"
#include "verikit/geometry/homography.hpp"

namespace verikit {

/// Per-channel intensity change v -> gain * v + bias.
struct Lighting {
  std::array<double, 3> gain = {1.0, 1.0, 1.0};
  std::array<double, 3> bias = {0.0, 0.0, 0.0};

  bool is_identity() const noexcept;
  /// Largest |gain * v + bias - v| over v in [0,1] and all channels.
  double max_change() const noexcept;
  float apply(float v, int channel) const noexcept;
  /// Exact inverse on values produced without clamping.
  double invert(double v, int channel) const noexcept;
  void validate() const;
};

/// Geometric map from template pixels to scene pixels, with photometric change.
struct TransformSpec {
  enum class Kind { affine, homography };

  Kind kind = Kind::homography;
  double rotation = 0.0;  ///< affine only, radians about the template center
  Vec2 translation = Vec2::Zero();
  double scale = 1.0;
  Homography h;  ///< the map actually applied, for both kinds
  Lighting lighting;
  double blur_sigma = 0.0;

  /// p' = scale * R(rotation) * (p - center) + center + translation.
  static TransformSpec affine(double rotation, const Vec2& translation, double scale,
                              const Vec2& center);
  static TransformSpec projective(const Homography& h);
  void validate() const;
};

struct RandomTransformOptions {
  double corner_jitter = 0.1;  ///< fraction of the unit-square diagonal
  double gain_min = 0.8;
  double gain_max = 1.25;
  double bias_min = -0.05;
  double bias_max = 0.05;
  double blur_min = 0.0;
  double blur_max = 1.5;

  void validate() const;
};

/// Unit-square corners in TL, TR, BR, BL order.
std::array<Vec2, 4> unit_square();

/// True when the quad is strictly convex, counter-clockwise in image
/// coordinates (TL, TR, BR, BL), and each corner lies in its own quadrant
/// around the centroid.
bool corner_order_holds(const std::array<Vec2, 4>& quad) noexcept;

/// Homography of the unit square onto a jittered copy of itself, plus sampled
/// lighting and blur. Throws ValidationError("constraint unsatisfiable")
/// after 100 rejected corner draws.
TransformSpec random_transform(const RandomTransformOptions& options, std::uint64_t seed);

/// Maps a unit-square homography onto template pixels (0..w-1, 0..h-1) and
/// the destination box corners (x0, y0)..(x1, y1) in scene pixels.
Homography place_unit_homography(const Homography& unit, int template_width, int template_height,
                                 double x0, double y0, double x1, double y1);

}  // namespace verikit
