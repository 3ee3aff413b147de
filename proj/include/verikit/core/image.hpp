#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace verikit {

/// Dense row-major intensity grid with 1 or 3 interleaved channels in [0,1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f);
  /// Takes ownership of `data`; throws ValidationError on a length mismatch or
  /// an intensity outside [0,1].
  Image(int width, int height, int channels, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  float at(int x, int y, int c = 0) const noexcept { return data_[offset(x, y, c)]; }
  float& at(int x, int y, int c = 0) noexcept { return data_[offset(x, y, c)]; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t offset(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Per-pixel binary mask.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
              fill ? 1 : 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  bool at(int x, int y) const noexcept { return data_[index(x, y)] != 0; }
  void set(int x, int y, bool v) noexcept { data_[index(x, y)] = v ? 1 : 0; }
  std::size_t count() const noexcept;

  std::span<const std::uint8_t> data() const noexcept { return data_; }

  bool operator==(const Mask&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Clamps a value into the valid intensity range.
inline float clamp_intensity(double v) noexcept {
  return v < 0.0 ? 0.0f : (v > 1.0 ? 1.0f : static_cast<float>(v));
}

}  // namespace verikit
