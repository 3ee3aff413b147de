#include "verikit/synth/suite.hpp"

#include <algorithm>
#include <cmath>

#include "verikit/core/warp.hpp"
#include "verikit/synth/render.hpp"
#include "verikit/synth/transform.hpp"
#include "verikit/util/error.hpp"
#include "verikit/util/rng.hpp"

namespace verikit {

void SuiteSpec::validate() const {
  if (num_scenes < 1) throw ValidationError("num_scenes must be >= 1");
  if (objects_per_scene < 1 || objects_per_scene > grid * grid)
    throw ValidationError("objects_per_scene must lie in [1, grid^2]");
  if (!(false_positive_rate >= 0.0 && false_positive_rate <= 1.0))
    throw ValidationError("false_positive_rate must lie in [0,1]");
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (templates_per_class < 1) throw ValidationError("templates_per_class must be >= 1");
  if (template_size < 8) throw ValidationError("template_size must be >= 8");
  if (grid < 1 || scene_size / grid < template_size)
    throw ValidationError("grid cells must be at least template_size wide");
  if (!(box_jitter >= 0.0 && box_jitter < 0.2)) throw ValidationError("box_jitter must lie in [0, 0.2)");
  if (!(matcher_reach >= 0.0)) throw ValidationError("matcher_reach must be >= 0");
  if (greedy_candidates < 1) throw ValidationError("greedy_candidates must be >= 1");
}

std::string detection_kind_name(DetectionKind k) {
  switch (k) {
    case DetectionKind::true_positive:
      return "true_positive";
    case DetectionKind::wrong_class:
      return "wrong_class";
    case DetectionKind::background:
      return "background";
    case DetectionKind::mislocalized:
      return "mislocalized";
  }
  return "unknown";
}

namespace {

// Smooth procedural color texture: a base color plus a few plane waves.
struct Texture {
  std::array<double, 3> base{};
  struct Wave {
    double fx, fy, phase;
    std::array<double, 3> amp;
  };
  std::vector<Wave> waves;

  static Texture random(Rng& rng, double min_period, double max_period, double amplitude) {
    Texture t;
    for (double& b : t.base) b = rng.uniform(0.3, 0.7);
    for (int k = 0; k < 4; ++k) {
      const double period = rng.uniform(min_period, max_period);
      const double dir = rng.uniform(0.0, 2.0 * M_PI);
      Wave w{2.0 * M_PI / period * std::cos(dir), 2.0 * M_PI / period * std::sin(dir),
             rng.uniform(0.0, 2.0 * M_PI), {}};
      for (double& a : w.amp) a = rng.uniform(-amplitude, amplitude);
      t.waves.push_back(w);
    }
    return t;
  }

  float value(double x, double y, int c) const {
    double v = base[static_cast<std::size_t>(c)];
    for (const Wave& w : waves) v += w.amp[static_cast<std::size_t>(c)] * std::sin(w.fx * x + w.fy * y + w.phase);
    return clamp_intensity(v);
  }
};

// Image of the texture rotated by `angle` about the image center.
Image render_rotated(const Texture& tex, int n, double angle) {
  Image out(n, n, 3);
  const double c = 0.5 * (n - 1);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double dx = x - c, dy = y - c;
      const double u = ca * dx + sa * dy, v = -sa * dx + ca * dy;
      for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = tex.value(u, v, ch);
    }
  return out;
}

Mask disk_mask(int n) {
  Mask m(n, n);
  const double c = 0.5 * (n - 1), r = 0.5 * n - 0.5;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      m.set(x, y, (x - c) * (x - c) + (y - c) * (y - c) <= r * r);
  return m;
}

double angle_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * M_PI);
  return std::min(d, 2.0 * M_PI - d);
}

struct SceneObject {
  int class_id;
  double angle;
  int cell;
  int placement;
};

Box clip_to_scene(Box b, int size) {
  b.x_min = std::max(b.x_min, -0.5);
  b.y_min = std::max(b.y_min, -0.5);
  b.x_max = std::min(b.x_max, size - 0.5);
  b.y_max = std::min(b.y_max, size - 0.5);
  return b;
}

Box jitter_box(const Box& b, double frac, Rng& rng) {
  const double w = b.width(), h = b.height();
  return Box{b.x_min + w * rng.uniform(-frac, frac), b.y_min + h * rng.uniform(-frac, frac),
             b.x_max + w * rng.uniform(-frac, frac), b.y_max + h * rng.uniform(-frac, frac)};
}

// Template m of the object's class -> crop coordinates, through the object's
// rotation and placement homography.
FlowField oracle_flow(const SynthScene& synth, const SceneObject& obj, double template_angle,
                      const Mask& mask, const CropWindow& window, int n) {
  const PlacedObject& placed = synth.placed[static_cast<std::size_t>(obj.placement)];
  const double c = 0.5 * (n - 1);
  const double rot = obj.angle - template_angle;
  const double ca = std::cos(rot), sa = std::sin(rot);
  FlowField flow(n, n);
  const int W = synth.scene.width(), H = synth.scene.height();
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      if (!mask.at(x, y)) continue;
      const double dx = x - c, dy = y - c;
      const Vec2 src(c + ca * dx - sa * dy, c + sa * dx + ca * dy);
      const auto q = placed.spec.h.try_apply(src);
      if (!q) continue;
      const double rx = std::floor(q->x() + 0.5), ry = std::floor(q->y() + 0.5);
      if (rx < 0 || ry < 0 || rx >= W || ry >= H) continue;
      if (synth.owner_at(static_cast<int>(rx), static_cast<int>(ry)) != obj.placement) continue;
      flow.set(x, y, q->x() - window.x0, q->y() - window.y0);
    }
  return flow;
}

FlowField greedy_flow(const Image& templ, const Mask& mask, const Image& crop, const Box& box_in_crop,
                      int candidates, Rng& rng) {
  const int n = templ.width();
  FlowField flow(n, templ.height());
  const int x0 = std::max(0, static_cast<int>(std::ceil(box_in_crop.x_min)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(box_in_crop.y_min)));
  const int x1 = std::min(crop.width() - 1, static_cast<int>(std::floor(box_in_crop.x_max)));
  const int y1 = std::min(crop.height() - 1, static_cast<int>(std::floor(box_in_crop.y_max)));
  if (x1 < x0 || y1 < y0) return flow;
  for (int y = 0; y < templ.height(); ++y)
    for (int x = 0; x < n; ++x) {
      if (!mask.at(x, y)) continue;
      double best = 1e300;
      int bx = x0, by = y0;
      for (int k = 0; k < candidates; ++k) {
        const int cx = x0 + static_cast<int>(rng.index(static_cast<std::uint64_t>(x1 - x0 + 1)));
        const int cy = y0 + static_cast<int>(rng.index(static_cast<std::uint64_t>(y1 - y0 + 1)));
        double d = 0.0;
        for (int ch = 0; ch < templ.channels(); ++ch) {
          const double diff = static_cast<double>(templ.at(x, y, ch)) - crop.at(cx, cy, ch);
          d += diff * diff;
        }
        if (d < best) {
          best = d;
          bx = cx;
          by = cy;
        }
      }
      flow.set(x, y, bx, by);
    }
  return flow;
}

}  // namespace

GeneratedSuite make_detection_suite(const SuiteSpec& spec) {
  spec.validate();
  const int n = spec.template_size;
  const int M = spec.templates_per_class;
  const Mask mask = disk_mask(n);

  std::vector<Texture> textures;
  GeneratedSuite out;
  for (int c = 0; c < spec.num_classes; ++c) {
    Rng rng(derive_seed(spec.seed, {0x7e47, static_cast<std::uint64_t>(c)}));
    textures.push_back(Texture::random(rng, 0.4 * n, 1.2 * n, 0.12));
    TemplateSet set;
    set.class_id = c;
    for (int m = 0; m < M; ++m) {
      set.templates.push_back(render_rotated(textures.back(), n, 2.0 * M_PI * m / M));
      set.masks.push_back(mask);
    }
    out.suite.templates.push_back(std::move(set));
  }

  std::int64_t next_id = 0;
  const int cell = spec.scene_size / spec.grid;
  for (int s = 0; s < spec.num_scenes; ++s) {
    Rng rng(derive_seed(spec.seed, {0x5cee, static_cast<std::uint64_t>(s)}));
    const Texture bg_tex = Texture::random(rng, 10.0, 40.0, 0.2);
    Image background(spec.scene_size, spec.scene_size, 3);
    for (int y = 0; y < spec.scene_size; ++y)
      for (int x = 0; x < spec.scene_size; ++x)
        for (int ch = 0; ch < 3; ++ch) background.at(x, y, ch) = bg_tex.value(x, y, ch);

    std::vector<int> cells(static_cast<std::size_t>(spec.grid * spec.grid));
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
    for (std::size_t i = cells.size() - 1; i > 0; --i) std::swap(cells[i], cells[rng.index(i + 1)]);

    std::vector<SceneObject> objects;
    std::vector<Image> sources;
    std::vector<Placement> placements;
    sources.reserve(static_cast<std::size_t>(spec.objects_per_scene));
    for (int k = 0; k < spec.objects_per_scene; ++k) {
      SceneObject obj{static_cast<int>(rng.index(static_cast<std::uint64_t>(spec.num_classes))),
                      rng.uniform(0.0, 2.0 * M_PI), cells[static_cast<std::size_t>(k)], k};
      sources.push_back(render_rotated(textures[static_cast<std::size_t>(obj.class_id)], n, obj.angle));
      RandomTransformOptions topt;
      topt.corner_jitter = spec.corner_jitter;
      TransformSpec t = random_transform(topt, rng.next());
      const double side = cell * rng.uniform(0.6, 0.75);
      const double cx = (obj.cell % spec.grid + 0.5) * cell - 0.5 + rng.uniform(-0.05, 0.05) * cell;
      const double cy = (obj.cell / spec.grid + 0.5) * cell - 0.5 + rng.uniform(-0.05, 0.05) * cell;
      t.h = place_unit_homography(t.h, n, n, cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2);
      placements.push_back({nullptr, &mask, t, obj.class_id, 0});
      objects.push_back(obj);
    }
    for (std::size_t k = 0; k < placements.size(); ++k) placements[k].templ = &sources[k];
    const SynthScene synth = compose_scene(background, placements);

    SceneRecord record;
    record.scene_id = s;
    record.scene = synth.scene;
    for (const PlacedObject& p : synth.placed) record.ground_truth.push_back({p.box, p.class_id});

    struct Pending {
      Detection det;
      DetectionKind kind;
      int object;  ///< object whose geometry the oracle flows follow, or -1
    };
    std::vector<Pending> pending;
    const double rate = spec.false_positive_rate;
    const int num_objects = static_cast<int>(objects.size());
    int num_fp = rate >= 1.0 ? num_objects
                             : static_cast<int>(std::lround(num_objects * rate / (1.0 - rate)));
    if (rate < 1.0) {
      for (int k = 0; k < num_objects; ++k) {
        Detection d;
        d.class_id = objects[static_cast<std::size_t>(k)].class_id;
        d.box = clip_to_scene(jitter_box(synth.placed[static_cast<std::size_t>(k)].box, spec.box_jitter, rng),
                              spec.scene_size);
        d.confidence = rng.uniform(0.5, 0.95);
        pending.push_back({d, DetectionKind::true_positive, k});
      }
    }
    std::vector<int> empty_cells(cells.begin() + spec.objects_per_scene, cells.end());
    for (int f = 0; f < num_fp; ++f) {
      const double u = rng.uniform();
      DetectionKind kind = u < 0.6 ? DetectionKind::wrong_class
                                   : (u < 0.85 ? DetectionKind::background : DetectionKind::mislocalized);
      if (kind == DetectionKind::background && empty_cells.empty()) kind = DetectionKind::wrong_class;
      const int k = static_cast<int>(rng.index(static_cast<std::uint64_t>(num_objects)));
      const Box& gt = synth.placed[static_cast<std::size_t>(k)].box;
      Detection d;
      d.confidence = rng.uniform(0.6, 1.0);
      int follow = -1;
      if (kind == DetectionKind::wrong_class) {
        int c = static_cast<int>(rng.index(static_cast<std::uint64_t>(spec.num_classes - 1)));
        if (c >= objects[static_cast<std::size_t>(k)].class_id) ++c;
        d.class_id = c;
        d.box = clip_to_scene(jitter_box(gt, spec.box_jitter, rng), spec.scene_size);
      } else if (kind == DetectionKind::background) {
        const int e = empty_cells[rng.index(empty_cells.size())];
        const double side = cell * rng.uniform(0.55, 0.75);
        const double cx = (e % spec.grid + 0.5) * cell - 0.5, cy = (e / spec.grid + 0.5) * cell - 0.5;
        d.class_id = static_cast<int>(rng.index(static_cast<std::uint64_t>(spec.num_classes)));
        d.box = Box{cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2};
      } else {
        d.class_id = objects[static_cast<std::size_t>(k)].class_id;
        const double frac = rng.uniform(0.4, 0.6);
        const bool horizontal = rng.bernoulli(0.5);
        double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
        const double shift = frac * (horizontal ? gt.width() : gt.height());
        Box moved = horizontal ? gt.translated(sign * shift, 0.0) : gt.translated(0.0, sign * shift);
        if (moved.x_min < -0.5 || moved.y_min < -0.5 || moved.x_max > spec.scene_size - 0.5 ||
            moved.y_max > spec.scene_size - 0.5) {
          sign = -sign;
          moved = horizontal ? gt.translated(sign * shift, 0.0) : gt.translated(0.0, sign * shift);
        }
        d.box = moved;
        follow = k;
      }
      pending.push_back({d, kind, follow});
    }

    for (Pending& p : pending) {
      p.det.detection_id = next_id++;
      validate_detection(p.det);
      const CropWindow window = crop_window(p.det.box);
      const Image crop = crop_to_square(record.scene, p.det.box);
      const Box box_in_crop = window.to_crop(p.det.box);
      const TemplateSet& set = out.suite.templates[static_cast<std::size_t>(p.det.class_id)];
      Rng flow_rng(derive_seed(spec.seed, {0xf10f, static_cast<std::uint64_t>(p.det.detection_id)}));
      for (int m = 0; m < M; ++m) {
        const double template_angle = 2.0 * M_PI * m / M;
        FlowField flow;
        if (p.object >= 0 &&
            angle_gap(objects[static_cast<std::size_t>(p.object)].angle, template_angle) <= spec.matcher_reach) {
          flow = oracle_flow(synth, objects[static_cast<std::size_t>(p.object)], template_angle, mask, window, n);
        } else {
          flow = greedy_flow(set.templates[static_cast<std::size_t>(m)], mask, crop, box_in_crop,
                             spec.greedy_candidates, flow_rng);
        }
        record.flows.emplace(FlowKey{p.det.detection_id, p.det.class_id, m}, std::move(flow));
      }
      out.kinds.emplace(p.det.detection_id, p.kind);
      record.detections.push_back(p.det);
    }
    out.suite.scenes.push_back(std::move(record));
  }
  return out;
}

}  // namespace verikit
