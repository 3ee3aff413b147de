#include "verikit/core/box.hpp"

#include <algorithm>
#include <cmath>

#include "verikit/util/error.hpp"

namespace verikit {

Box make_box(double x_min, double y_min, double x_max, double y_max) {
  const Box b{x_min, y_min, x_max, y_max};
  if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_max) || !b.valid())
    throw ValidationError("invalid box: require x_min < x_max and y_min < y_max");
  return b;
}

double iou(const Box& a, const Box& b) noexcept {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace verikit
