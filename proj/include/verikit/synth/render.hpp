#pragma once

#include <span>
#include <vector>

#include "verikit/core/box.hpp"
#include "verikit/core/flow.hpp"
#include "verikit/core/image.hpp"
#include "verikit/synth/transform.hpp"

namespace verikit {

struct Placement {
  const Image* templ = nullptr;
  const Mask* mask = nullptr;  ///< nullptr treats every template pixel as foreground
  TransformSpec spec;
  int class_id = 0;
  int template_index = 0;
};

struct PlacedObject {
  int class_id = 0;
  int template_index = 0;
  TransformSpec spec;
  Box box;         ///< tight box around the scene pixels the placement wrote
  FlowField flow;  ///< template pixel -> scene pixel; occluded pixels invalid
};

struct SynthScene {
  Image scene;
  Image background;
  Image unlit;  ///< composite before lighting and blur
  std::vector<PlacedObject> placed;
  std::vector<int> owner;  ///< per scene pixel: index of the visible placement, -1 for background

  int owner_at(int x, int y) const noexcept {
    return owner[static_cast<std::size_t>(y) * static_cast<std::size_t>(scene.width()) +
                 static_cast<std::size_t>(x)];
  }
};

/// Separable Gaussian blur with a 3-sigma kernel and clamped borders.
Image gaussian_blur(const Image& image, double sigma);

/// Bilinear sample with coordinates clamped to the image.
float sample_bilinear(const Image& image, double x, double y, int channel) noexcept;

/// Backward-warps each masked template into the background in list order.
/// Throws ValidationError naming the placement index when its warped
/// template leaves the background.
SynthScene compose_scene(const Image& background, std::span<const Placement> placements);

}  // namespace verikit
