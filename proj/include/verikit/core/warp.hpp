#pragma once

#include "verikit/core/box.hpp"
#include "verikit/core/flow.hpp"
#include "verikit/core/image.hpp"

namespace verikit {

/// Integer placement of a square crop inside its scene.
struct CropWindow {
  int x0 = 0;
  int y0 = 0;
  int side = 0;

  /// Maps a scene-coordinate box into this crop's coordinates.
  Box to_crop(const Box& scene_box) const noexcept {
    return scene_box.translated(-static_cast<double>(x0), -static_cast<double>(y0));
  }
};

/// Square window centered on `box`, side = ceil(max(w, h)). Throws
/// ValidationError("empty crop") if the side rounds to zero.
CropWindow crop_window(const Box& box);

/// Extracts the square crop around `box`, zero-filling outside the scene.
/// Throws ValidationError("empty crop") for degenerate boxes or boxes that do
/// not intersect the scene.
Image crop_to_square(const Image& scene, const Box& box);

struct SplatResult {
  Image image;
  Mask written;
};

/// Forward-warps every valid template pixel to its rounded target; later
/// writes win in row-major template order. Unwritten pixels stay 0.
SplatResult splat_flow(const Image& templ, const FlowField& flow, int target_width,
                       int target_height);

/// T(I): the image part of splat_flow.
Image apply_flow(const Image& templ, const FlowField& flow, int target_width, int target_height);

}  // namespace verikit
