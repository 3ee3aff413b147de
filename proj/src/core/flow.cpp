#include "verikit/core/flow.hpp"

#include <algorithm>
#include <string>

#include "verikit/util/error.hpp"

namespace verikit {

FlowField::FlowField(int width, int height, std::vector<FlowVector> entries)
    : width_(width), height_(height), entries_(std::move(entries)) {
  if (width < 0 || height < 0) throw ValidationError("negative flow dimensions");
  if (entries_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw ValidationError("flow has " + std::to_string(entries_.size()) + " entries, expected " +
                          std::to_string(width) + "x" + std::to_string(height));
}

std::size_t FlowField::valid_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const FlowVector& f) { return f.valid; }));
}

FlowField FlowField::identity(int width, int height) {
  FlowField flow(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) flow.set(x, y, x, y);
  return flow;
}

}  // namespace verikit
