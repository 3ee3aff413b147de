#include "verikit/synth/render.hpp"

#include <algorithm>
#include <cmath>

#include "verikit/util/error.hpp"

namespace verikit {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Blur of the colors in `layer` restricted to pixels where alpha is set:
// blur(color * alpha) / blur(alpha), so background never bleeds in.
void blur_layer(std::vector<float>& layer, const std::vector<std::uint8_t>& alpha, int w, int h,
                int channels, double sigma, int bx0, int by0, int bx1, int by1) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int cw = channels + 1;
  const int rw = bx1 - bx0 + 1;
  const int rh = by1 - by0 + 1;
  std::vector<double> src(static_cast<std::size_t>(rw * rh * cw), 0.0);
  for (int y = by0; y <= by1; ++y)
    for (int x = bx0; x <= bx1; ++x) {
      const std::size_t pi = static_cast<std::size_t>(y) * w + x;
      if (!alpha[pi]) continue;
      double* s = &src[static_cast<std::size_t>(((y - by0) * rw + (x - bx0)) * cw)];
      for (int c = 0; c < channels; ++c) s[c] = layer[pi * channels + c];
      s[channels] = 1.0;
    }
  std::vector<double> tmp(src.size(), 0.0);
  for (int y = 0; y < rh; ++y)
    for (int x = 0; x < rw; ++x)
      for (int i = -r; i <= r; ++i) {
        const int xx = std::clamp(x + i, 0, rw - 1);
        const double wgt = k[static_cast<std::size_t>(i + r)];
        for (int c = 0; c < cw; ++c)
          tmp[static_cast<std::size_t>((y * rw + x) * cw + c)] +=
              wgt * src[static_cast<std::size_t>((y * rw + xx) * cw + c)];
      }
  std::fill(src.begin(), src.end(), 0.0);
  for (int y = 0; y < rh; ++y)
    for (int i = -r; i <= r; ++i) {
      const int yy = std::clamp(y + i, 0, rh - 1);
      const double wgt = k[static_cast<std::size_t>(i + r)];
      for (int x = 0; x < rw; ++x)
        for (int c = 0; c < cw; ++c)
          src[static_cast<std::size_t>((y * rw + x) * cw + c)] +=
              wgt * tmp[static_cast<std::size_t>((yy * rw + x) * cw + c)];
    }
  (void)h;
  for (int y = by0; y <= by1; ++y)
    for (int x = bx0; x <= bx1; ++x) {
      const std::size_t pi = static_cast<std::size_t>(y) * w + x;
      if (!alpha[pi]) continue;
      const double* s = &src[static_cast<std::size_t>(((y - by0) * rw + (x - bx0)) * cw)];
      for (int c = 0; c < channels; ++c) layer[pi * channels + c] = clamp_intensity(s[c] / s[channels]);
    }
}

}  // namespace

Image gaussian_blur(const Image& image, double sigma) {
  if (!(sigma >= 0.0)) throw ValidationError("blur sigma must be >= 0");
  if (sigma == 0.0 || image.empty()) return image;
  const int w = image.width(), h = image.height(), ch = image.channels();
  std::vector<float> data(image.data().begin(), image.data().end());
  std::vector<std::uint8_t> alpha(image.pixel_count(), 1);
  blur_layer(data, alpha, w, h, ch, sigma, 0, 0, w - 1, h - 1);
  return Image(w, h, ch, std::move(data));
}

float sample_bilinear(const Image& image, double x, double y, int channel) noexcept {
  x = std::clamp(x, 0.0, static_cast<double>(image.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(image.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, image.width() - 1);
  const int y1 = std::min(y0 + 1, image.height() - 1);
  const double fx = x - x0, fy = y - y0;
  if (fx == 0.0 && fy == 0.0) return image.at(x0, y0, channel);
  const double top = (1.0 - fx) * image.at(x0, y0, channel) + fx * image.at(x1, y0, channel);
  const double bottom = (1.0 - fx) * image.at(x0, y1, channel) + fx * image.at(x1, y1, channel);
  return clamp_intensity((1.0 - fy) * top + fy * bottom);
}

SynthScene compose_scene(const Image& background, std::span<const Placement> placements) {
  const int W = background.width(), H = background.height(), C = background.channels();
  SynthScene out;
  out.background = background;
  std::vector<float> scene(background.data().begin(), background.data().end());
  std::vector<float> unlit = scene;
  out.owner.assign(background.pixel_count(), -1);

  for (std::size_t k = 0; k < placements.size(); ++k) {
    const Placement& pl = placements[k];
    const std::string where = "placement " + std::to_string(k);
    if (pl.templ == nullptr || pl.templ->empty()) throw ValidationError(where + ": missing template");
    const Image& t = *pl.templ;
    if (t.channels() != C) throw ValidationError(where + ": channel count differs from background");
    if (pl.mask && (pl.mask->width() != t.width() || pl.mask->height() != t.height()))
      throw ValidationError(where + ": mask size differs from template");
    pl.spec.validate();

    const Homography& h = pl.spec.h;
    const double tw = t.width() - 1, th = t.height() - 1;
    double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
    for (const Vec2& corner : {Vec2(0, 0), Vec2(tw, 0), Vec2(tw, th), Vec2(0, th)}) {
      const auto q = h.try_apply(corner);
      if (!q) throw ValidationError(where + " out of bounds");
      minx = std::min(minx, q->x());
      miny = std::min(miny, q->y());
      maxx = std::max(maxx, q->x());
      maxy = std::max(maxy, q->y());
    }
    if (minx < -0.5 || miny < -0.5 || maxx > W - 0.5 || maxy > H - 0.5)
      throw ValidationError(where + " out of bounds");

    const Homography inv = h.inverse();
    const int bx0 = std::max(0, static_cast<int>(std::floor(minx)));
    const int by0 = std::max(0, static_cast<int>(std::floor(miny)));
    const int bx1 = std::min(W - 1, static_cast<int>(std::ceil(maxx)));
    const int by1 = std::min(H - 1, static_cast<int>(std::ceil(maxy)));
    std::vector<float> layer(scene.size(), 0.0f);
    std::vector<std::uint8_t> alpha(background.pixel_count(), 0);
    int wx0 = W, wy0 = H, wx1 = -1, wy1 = -1;
    for (int y = by0; y <= by1; ++y)
      for (int x = bx0; x <= bx1; ++x) {
        const auto p = inv.try_apply(Vec2(x, y));
        if (!p) continue;
        const double nx = std::floor(p->x() + 0.5), ny = std::floor(p->y() + 0.5);
        if (nx < 0 || ny < 0 || nx > tw || ny > th) continue;
        if (pl.mask && !pl.mask->at(static_cast<int>(nx), static_cast<int>(ny))) continue;
        const std::size_t pi = static_cast<std::size_t>(y) * W + x;
        alpha[pi] = 1;
        for (int c = 0; c < C; ++c) layer[pi * C + c] = sample_bilinear(t, p->x(), p->y(), c);
        wx0 = std::min(wx0, x);
        wy0 = std::min(wy0, y);
        wx1 = std::max(wx1, x);
        wy1 = std::max(wy1, y);
      }
    if (wx1 < 0) throw ValidationError(where + " covers no scene pixel");

    std::vector<float> plain = layer;
    for (std::size_t pi = 0; pi < alpha.size(); ++pi)
      if (alpha[pi])
        for (int c = 0; c < C; ++c) layer[pi * C + c] = pl.spec.lighting.apply(layer[pi * C + c], c);
    if (pl.spec.blur_sigma > 0.0) blur_layer(layer, alpha, W, H, C, pl.spec.blur_sigma, bx0, by0, bx1, by1);

    for (std::size_t pi = 0; pi < alpha.size(); ++pi) {
      if (!alpha[pi]) continue;
      for (int c = 0; c < C; ++c) {
        scene[pi * C + c] = layer[pi * C + c];
        unlit[pi * C + c] = plain[pi * C + c];
      }
      out.owner[pi] = static_cast<int>(k);
    }

    PlacedObject obj;
    obj.class_id = pl.class_id;
    obj.template_index = pl.template_index;
    obj.spec = pl.spec;
    obj.box = Box{wx0 - 0.5, wy0 - 0.5, wx1 + 0.5, wy1 + 0.5};
    out.placed.push_back(std::move(obj));
  }

  for (std::size_t k = 0; k < placements.size(); ++k) {
    const Placement& pl = placements[k];
    const Image& t = *pl.templ;
    FlowField flow(t.width(), t.height());
    for (int y = 0; y < t.height(); ++y)
      for (int x = 0; x < t.width(); ++x) {
        if (pl.mask && !pl.mask->at(x, y)) continue;
        const auto q = pl.spec.h.try_apply(Vec2(x, y));
        if (!q || !std::isfinite(q->x()) || !std::isfinite(q->y())) continue;
        const double rx = std::floor(q->x() + 0.5), ry = std::floor(q->y() + 0.5);
        if (rx < 0 || ry < 0 || rx >= W || ry >= H) continue;
        if (out.owner[static_cast<std::size_t>(ry) * W + static_cast<std::size_t>(rx)] !=
            static_cast<int>(k))
          continue;
        flow.set(x, y, q->x(), q->y());
      }
    out.placed[k].flow = std::move(flow);
  }

  out.scene = Image(W, H, C, std::move(scene));
  out.unlit = Image(W, H, C, std::move(unlit));
  return out;
}

}  // namespace verikit
