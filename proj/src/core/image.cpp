#include "verikit/core/image.hpp"

#include <algorithm>
#include <string>

#include "verikit/util/error.hpp"

namespace verikit {

namespace {

void check_shape(int width, int height, int channels) {
  if (width <= 0 || height <= 0)
    throw ValidationError("image dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  if (channels != 1 && channels != 3)
    throw ValidationError("image must have 1 or 3 channels, got " + std::to_string(channels));
}

}  // namespace

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  if (!(fill >= 0.0f && fill <= 1.0f)) throw ValidationError("intensity outside [0,1]");
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

Image::Image(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_shape(width, height, channels);
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
    throw ValidationError("image data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height) + "x" + std::to_string(channels));
  const auto bad = std::find_if(data_.begin(), data_.end(),
                                [](float v) { return !(v >= 0.0f && v <= 1.0f); });
  if (bad != data_.end())
    throw ValidationError("intensity outside [0,1] at sample " +
                          std::to_string(bad - data_.begin()));
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

}  // namespace verikit
