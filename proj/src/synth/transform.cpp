#include "verikit/synth/transform.hpp"

#include <algorithm>
#include <cmath>

#include "verikit/util/error.hpp"
#include "verikit/util/rng.hpp"

namespace verikit {

bool Lighting::is_identity() const noexcept {
  for (int c = 0; c < 3; ++c)
    if (gain[c] != 1.0 || bias[c] != 0.0) return false;
  return true;
}

double Lighting::max_change() const noexcept {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) {
    // The change is affine in v, so the extremes sit at v = 0 and v = 1.
    m = std::max(m, std::abs(bias[c]));
    m = std::max(m, std::abs(gain[c] - 1.0 + bias[c]));
  }
  return m;
}

float Lighting::apply(float v, int channel) const noexcept {
  return clamp_intensity(gain[channel] * v + bias[channel]);
}

double Lighting::invert(double v, int channel) const noexcept {
  return (v - bias[channel]) / gain[channel];
}

void Lighting::validate() const {
  for (int c = 0; c < 3; ++c) {
    if (!(gain[c] > 0.0) || !std::isfinite(gain[c])) throw ValidationError("lighting gain must be > 0");
    if (!std::isfinite(bias[c])) throw ValidationError("lighting bias must be finite");
  }
}

TransformSpec TransformSpec::affine(double rotation, const Vec2& translation, double scale,
                                    const Vec2& center) {
  if (!(scale > 0.0)) throw ValidationError("affine scale must be > 0");
  TransformSpec s;
  s.kind = Kind::affine;
  s.rotation = rotation;
  s.translation = translation;
  s.scale = scale;
  s.h = Homography::similarity(rotation, scale, center, translation);
  return s;
}

TransformSpec TransformSpec::projective(const Homography& h) {
  TransformSpec s;
  s.kind = Kind::homography;
  s.h = h;
  return s;
}

void TransformSpec::validate() const {
  if (!(scale > 0.0)) throw ValidationError("transform scale must be > 0");
  if (!(blur_sigma >= 0.0)) throw ValidationError("blur_sigma must be >= 0");
  lighting.validate();
}

void RandomTransformOptions::validate() const {
  if (!(corner_jitter >= 0.0 && corner_jitter < 0.5))
    throw ValidationError("corner_jitter must lie in [0, 0.5)");
  if (!(gain_min > 0.0 && gain_min <= gain_max)) throw ValidationError("invalid gain range");
  if (!(bias_min <= bias_max)) throw ValidationError("invalid bias range");
  if (!(blur_min >= 0.0 && blur_min <= blur_max)) throw ValidationError("invalid blur range");
}

std::array<Vec2, 4> unit_square() {
  return {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(1.0, 1.0), Vec2(0.0, 1.0)};
}

bool corner_order_holds(const std::array<Vec2, 4>& q) noexcept {
  for (int i = 0; i < 4; ++i) {
    const Vec2 a = q[(i + 1) % 4] - q[i];
    const Vec2 b = q[(i + 2) % 4] - q[(i + 1) % 4];
    if (a.x() * b.y() - a.y() * b.x() <= 0.0) return false;
  }
  const Vec2 c = 0.25 * (q[0] + q[1] + q[2] + q[3]);
  return q[0].x() < c.x() && q[0].y() < c.y() && q[1].x() > c.x() && q[1].y() < c.y() &&
         q[2].x() > c.x() && q[2].y() > c.y() && q[3].x() < c.x() && q[3].y() > c.y();
}

TransformSpec random_transform(const RandomTransformOptions& options, std::uint64_t seed) {
  options.validate();
  Rng rng(seed);
  const std::array<Vec2, 4> square = unit_square();
  const double radius = options.corner_jitter * std::sqrt(2.0);
  std::array<Vec2, 4> quad = square;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    for (int i = 0; i < 4; ++i) {
      const double r = radius * std::sqrt(rng.uniform());
      const double a = rng.uniform(0.0, 2.0 * M_PI);
      quad[i] = square[i] + Vec2(r * std::cos(a), r * std::sin(a));
    }
    ok = corner_order_holds(quad);
  }
  if (!ok) throw ValidationError("constraint unsatisfiable");

  TransformSpec spec = TransformSpec::projective(
      options.corner_jitter == 0.0 ? Homography::identity()
                                   : Homography::from_correspondences(square, quad));
  for (int c = 0; c < 3; ++c) {
    spec.lighting.gain[c] = rng.uniform(options.gain_min, options.gain_max);
    spec.lighting.bias[c] = rng.uniform(options.bias_min, options.bias_max);
  }
  spec.blur_sigma = rng.uniform(options.blur_min, options.blur_max);
  return spec;
}

Homography place_unit_homography(const Homography& unit, int template_width, int template_height,
                                 double x0, double y0, double x1, double y1) {
  const double tw = std::max(1, template_width - 1);
  const double th = std::max(1, template_height - 1);
  const Homography to_unit = Homography::scaling(1.0 / tw, 1.0 / th);
  const Homography to_box =
      Homography::translation(x0, y0) * Homography::scaling(x1 - x0, y1 - y0);
  return to_box * unit * to_unit;
}

}  // namespace verikit
