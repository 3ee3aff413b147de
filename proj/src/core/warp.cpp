#include "verikit/core/warp.hpp"

#include <algorithm>
#include <cmath>

#include "verikit/util/error.hpp"

namespace verikit {

CropWindow crop_window(const Box& box) {
  if (!box.valid()) throw ValidationError("empty crop");
  const double extent = std::max(box.width(), box.height());
  const int side = static_cast<int>(std::ceil(extent - 1e-9));
  if (side <= 0) throw ValidationError("empty crop");
  const double cx = 0.5 * (box.x_min + box.x_max);
  const double cy = 0.5 * (box.y_min + box.y_max);
  CropWindow w;
  w.side = side;
  w.x0 = static_cast<int>(std::floor(cx - 0.5 * side + 0.5));
  w.y0 = static_cast<int>(std::floor(cy - 0.5 * side + 0.5));
  return w;
}

Image crop_to_square(const Image& scene, const Box& box) {
  const CropWindow w = crop_window(box);
  const bool intersects = box.x_max > 0.0 && box.y_max > 0.0 && box.x_min < scene.width() &&
                          box.y_min < scene.height();
  if (!intersects) throw ValidationError("empty crop");
  Image out(w.side, w.side, scene.channels());
  for (int y = 0; y < w.side; ++y) {
    const int sy = w.y0 + y;
    for (int x = 0; x < w.side; ++x) {
      const int sx = w.x0 + x;
      if (!scene.contains(sx, sy)) continue;
      for (int c = 0; c < scene.channels(); ++c) out.at(x, y, c) = scene.at(sx, sy, c);
    }
  }
  return out;
}

SplatResult splat_flow(const Image& templ, const FlowField& flow, int target_width,
                       int target_height) {
  if (flow.width() != templ.width() || flow.height() != templ.height())
    throw ValidationError("flow dimensions do not match template dimensions");
  SplatResult r{Image(target_width, target_height, templ.channels()),
                Mask(target_width, target_height)};
  for (int y = 0; y < templ.height(); ++y) {
    for (int x = 0; x < templ.width(); ++x) {
      const FlowVector& f = flow.at(x, y);
      if (!f.valid || !std::isfinite(f.u) || !std::isfinite(f.v)) continue;
      const double tx = std::floor(static_cast<double>(f.u) + 0.5);
      const double ty = std::floor(static_cast<double>(f.v) + 0.5);
      if (tx < 0.0 || ty < 0.0 || tx >= target_width || ty >= target_height) continue;
      const int ix = static_cast<int>(tx);
      const int iy = static_cast<int>(ty);
      for (int c = 0; c < templ.channels(); ++c) r.image.at(ix, iy, c) = templ.at(x, y, c);
      r.written.set(ix, iy, true);
    }
  }
  return r;
}

Image apply_flow(const Image& templ, const FlowField& flow, int target_width, int target_height) {
  return splat_flow(templ, flow, target_width, target_height).image;
}

}  // namespace verikit
