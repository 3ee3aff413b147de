#include "verikit/matcher/exhaustive_ncc.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <vector>

#include "verikit/core/warp.hpp"
#include "verikit/util/error.hpp"
#include "verikit/util/parallel.hpp"

namespace verikit {

void NccMatcherOptions::validate() const {
  if (patch_radius < 0) throw ValidationError("patch_radius must be >= 0");
  if (!(min_score >= -1.0 && min_score <= 1.0)) throw ValidationError("min_score must lie in [-1, 1]");
  if (max_pixels < 1) throw ValidationError("max_pixels must be >= 1");
}

namespace {

// Zero-mean, unit-norm patch vectors for every pixel; a flat patch is all zeros.
class PatchBank {
 public:
  PatchBank(const Image& img, int radius) : dim_(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1) * img.channels())) {
    const int w = img.width(), h = img.height();
    data_.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * dim_, 0.0f);
    flat_.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), true);
    std::vector<double> v(dim_);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        std::size_t k = 0;
        double mean = 0.0;
        for (int dy = -radius; dy <= radius; ++dy)
          for (int dx = -radius; dx <= radius; ++dx) {
            const int sx = std::clamp(x + dx, 0, w - 1), sy = std::clamp(y + dy, 0, h - 1);
            for (int c = 0; c < img.channels(); ++c) {
              v[k] = img.at(sx, sy, c);
              mean += v[k++];
            }
          }
        mean /= static_cast<double>(dim_);
        double norm = 0.0;
        for (double& e : v) {
          e -= mean;
          norm += e * e;
        }
        norm = std::sqrt(norm);
        if (!(norm > 1e-9)) continue;
        const std::size_t idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
        flat_[idx] = false;
        float* out = &data_[idx * dim_];
        for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(v[i] / norm);
      }
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return flat_.size(); }
  bool flat(std::size_t idx) const noexcept { return flat_[idx]; }
  const float* patch(std::size_t idx) const noexcept { return &data_[idx * dim_]; }

 private:
  std::size_t dim_;
  std::vector<float> data_;
  std::vector<bool> flat_;
};

void check_inputs(const Image& templ, const Mask* mask, const Image& crop,
                  const NccMatcherOptions& opt) {
  opt.validate();
  if (templ.empty() || crop.empty()) throw ValidationError("exhaustive-ncc: empty image");
  if (templ.channels() != crop.channels()) throw ValidationError("exhaustive-ncc: channel mismatch");
  if (templ.pixel_count() > static_cast<std::size_t>(opt.max_pixels) ||
      crop.pixel_count() > static_cast<std::size_t>(opt.max_pixels))
    throw ValidationError("exhaustive-ncc: image exceeds " + std::to_string(opt.max_pixels) + " pixels");
  if (mask && (mask->width() != templ.width() || mask->height() != templ.height()))
    throw ValidationError("exhaustive-ncc: mask size mismatch");
}

void match_row(const PatchBank& src, const PatchBank& dst, const Mask* mask, int y, int tw, int cw,
               double min_score, FlowField& out) {
  const std::size_t dim = src.dim();
  for (int x = 0; x < tw; ++x) {
    if (mask && !mask->at(x, y)) continue;
    const std::size_t si = static_cast<std::size_t>(y) * static_cast<std::size_t>(tw) + static_cast<std::size_t>(x);
    if (src.flat(si)) continue;
    const float* a = src.patch(si);
    double best = -2.0;
    std::size_t best_idx = 0;
    for (std::size_t di = 0; di < dst.size(); ++di) {
      if (dst.flat(di)) continue;
      const float* b = dst.patch(di);
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += static_cast<double>(a[k]) * static_cast<double>(b[k]);
      if (s > best) {
        best = s;
        best_idx = di;
      }
    }
    if (best > min_score)
      out.set(x, y, static_cast<double>(best_idx % static_cast<std::size_t>(cw)),
              static_cast<double>(best_idx / static_cast<std::size_t>(cw)));
  }
}

}  // namespace

FlowField exhaustive_ncc_flow_serial(const Image& templ, const Mask* mask, const Image& crop,
                                     const NccMatcherOptions& options) {
  check_inputs(templ, mask, crop, options);
  const PatchBank src(templ, options.patch_radius), dst(crop, options.patch_radius);
  FlowField out(templ.width(), templ.height());
  for (int y = 0; y < templ.height(); ++y)
    match_row(src, dst, mask, y, templ.width(), crop.width(), options.min_score, out);
  return out;
}

FlowField exhaustive_ncc_flow(const Image& templ, const Mask* mask, const Image& crop,
                              const NccMatcherOptions& options, int jobs) {
  const int threads = resolve_jobs(jobs);
  if (threads == 1 || omp_in_parallel()) return exhaustive_ncc_flow_serial(templ, mask, crop, options);
  check_inputs(templ, mask, crop, options);
  const PatchBank src(templ, options.patch_radius), dst(crop, options.patch_radius);
  FlowField out(templ.width(), templ.height());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int y = 0; y < templ.height(); ++y)
    match_row(src, dst, mask, y, templ.width(), crop.width(), options.min_score, out);
  return out;
}

std::size_t match_suite_flows(Suite& suite, const NccMatcherOptions& options,
                              std::size_t viewpoints, int jobs) {
  options.validate();
  struct Job {
    std::size_t scene;
    FlowKey key;
    const Image* templ;
    const Mask* mask;
    std::shared_ptr<const Image> crop;
  };
  std::vector<Job> work;
  for (std::size_t s = 0; s < suite.scenes.size(); ++s) {
    SceneRecord& rec = suite.scenes[s];
    rec.flows.clear();
    for (const Detection& d : rec.detections) {
      const TemplateSet* set = find_templates(suite.templates, d.class_id);
      if (!set || set->templates.empty()) continue;
      std::shared_ptr<const Image> crop;
      try {
        crop = std::make_shared<const Image>(crop_to_square(rec.scene, d.box));
      } catch (const ValidationError&) {
        continue;  // verification reports the empty crop
      }
      std::vector<std::size_t> picks;
      if (viewpoints == 0 || viewpoints >= set->templates.size()) {
        picks.resize(set->templates.size());
        for (std::size_t m = 0; m < picks.size(); ++m) picks[m] = m;
      } else {
        picks = equally_spaced(set->templates.size(), viewpoints);
      }
      for (std::size_t m : picks)
        work.push_back({s, {d.detection_id, d.class_id, static_cast<int>(m)}, &set->templates[m],
                        set->mask(m), crop});
    }
  }
  std::vector<FlowField> flows(work.size());
  std::exception_ptr error;
  const int threads = resolve_jobs(jobs);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < work.size(); ++i) {
    try {
      flows[i] = exhaustive_ncc_flow_serial(*work[i].templ, work[i].mask, *work[i].crop, options);
    } catch (...) {
#pragma omp critical(verikit_matcher_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  for (std::size_t i = 0; i < work.size(); ++i)
    suite.scenes[work[i].scene].flows.emplace(work[i].key, std::move(flows[i]));
  return work.size();
}

}  // namespace verikit
