#pragma once

#include <cstddef>
#include <vector>

namespace verikit {

/// Target of one template pixel. Coordinates are in crop pixel units with pixel
/// (x, y) located at integer position (x, y).
struct FlowVector {
  float u = 0.0f;
  float v = 0.0f;
  bool valid = false;

  bool operator==(const FlowVector&) const = default;
};

/// Dense template-to-crop mapping; one entry per template pixel, row-major.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height)
      : width_(width), height_(height),
        entries_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {}
  /// Throws ValidationError unless entries.size() == width * height.
  FlowField(int width, int height, std::vector<FlowVector> entries);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return entries_.size(); }

  const FlowVector& at(int x, int y) const noexcept { return entries_[index(x, y)]; }
  FlowVector& at(int x, int y) noexcept { return entries_[index(x, y)]; }
  void set(int x, int y, double u, double v) noexcept {
    entries_[index(x, y)] = {static_cast<float>(u), static_cast<float>(v), true};
  }
  void invalidate(int x, int y) noexcept { entries_[index(x, y)] = {}; }

  const std::vector<FlowVector>& entries() const noexcept { return entries_; }
  std::size_t valid_count() const noexcept;

  /// Identity mapping with every entry valid.
  static FlowField identity(int width, int height);

  bool operator==(const FlowField&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<FlowVector> entries_;
};

}  // namespace verikit
