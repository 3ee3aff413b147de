#pragma once

#include <array>

namespace verikit {

/// Axis-aligned box in continuous pixel coordinates.
struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept {
    return width() > 0.0 && height() > 0.0 ? width() * height() : 0.0;
  }
  bool valid() const noexcept { return x_min < x_max && y_min < y_max; }
  /// Boundary-inclusive containment.
  bool contains(double x, double y) const noexcept {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  Box translated(double dx, double dy) const noexcept {
    return {x_min + dx, y_min + dy, x_max + dx, y_max + dy};
  }
  std::array<double, 4> as_array() const noexcept { return {x_min, y_min, x_max, y_max}; }

  bool operator==(const Box&) const = default;
};

/// Builds a box, throwing ValidationError unless x_min < x_max and y_min < y_max.
Box make_box(double x_min, double y_min, double x_max, double y_max);

/// Intersection over union; 0 for disjoint boxes or a zero-area union.
double iou(const Box& a, const Box& b) noexcept;

}  // namespace verikit
