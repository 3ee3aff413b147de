#include "verikit/geometry/ransac.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "verikit/util/error.hpp"
#include "verikit/util/parallel.hpp"
#include "verikit/util/rng.hpp"

namespace verikit {

void RansacConfig::validate() const {
  if (iterations < 1) throw ValidationError("ransac iterations must be >= 1");
  if (!(epsilon >= 0.0)) throw ValidationError("ransac epsilon must be >= 0");
  if (min_correspondences < 8) throw ValidationError("min_correspondences must be >= 8");
  if (stride < 1) throw ValidationError("stride must be >= 1");
  if (max_count < 8) throw ValidationError("max_count must be >= 8");
}

namespace {

constexpr std::size_t kSampleSize = 8;

bool is_inlier(const Eigen::Matrix3d& m, const Correspondence& c, double epsilon) noexcept {
  const double x = c.src.x(), y = c.src.y();
  const double xp = c.dst.x(), yp = c.dst.y();
  const double fx0 = m(0, 0) * x + m(0, 1) * y + m(0, 2);
  const double fx1 = m(1, 0) * x + m(1, 1) * y + m(1, 2);
  const double fx2 = m(2, 0) * x + m(2, 1) * y + m(2, 2);
  const double ft0 = m(0, 0) * xp + m(1, 0) * yp + m(2, 0);
  const double ft1 = m(0, 1) * xp + m(1, 1) * yp + m(2, 1);
  const double r = xp * fx0 + yp * fx1 + fx2;
  const double den = fx0 * fx0 + fx1 * fx1 + ft0 * ft0 + ft1 * ft1;
  if (den == 0.0) return false;
  return std::sqrt(r * r / den) <= epsilon;
}

struct Hypothesis {
  std::size_t inliers = 0;
  int iteration = -1;
  std::optional<FundamentalMatrix> model;

  // More inliers wins; ties go to the earlier iteration.
  bool beats(const Hypothesis& other) const noexcept {
    if (!model) return false;
    if (!other.model) return true;
    if (inliers != other.inliers) return inliers > other.inliers;
    return iteration < other.iteration;
  }
};

Hypothesis evaluate_iteration(std::span<const Correspondence> corrs, const RansacConfig& cfg,
                              int iteration) {
  Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(iteration)}));
  std::array<std::size_t, kSampleSize> picks{};
  std::array<Correspondence, kSampleSize> sample;
  for (std::size_t k = 0; k < kSampleSize; ++k) {
    std::size_t idx;
    do {
      idx = static_cast<std::size_t>(rng.index(corrs.size()));
    } while (std::find(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(k), idx) !=
             picks.begin() + static_cast<std::ptrdiff_t>(k));
    picks[k] = idx;
    sample[k] = corrs[idx];
  }
  Hypothesis h;
  h.iteration = iteration;
  h.model = try_eight_point(sample);
  if (h.model) h.inliers = count_inliers(*h.model, corrs, cfg.epsilon);
  return h;
}

RigidityResult finish(std::span<const Correspondence> corrs, const RansacConfig& cfg,
                      Hypothesis best) {
  RigidityResult out;
  out.total = corrs.size();
  if (!best.model) return out;

  std::vector<Correspondence> support;
  support.reserve(best.inliers);
  for (const Correspondence& c : corrs)
    if (is_inlier(best.model->matrix(), c, cfg.epsilon)) support.push_back(c);
  if (auto refit = try_eight_point(support)) {
    const std::size_t n = count_inliers(*refit, corrs, cfg.epsilon);
    if (n >= best.inliers) {
      best.model = refit;
      best.inliers = n;
    }
  }
  out.model = best.model;
  out.inliers = best.inliers;
  out.inlier_fraction = static_cast<double>(best.inliers) / static_cast<double>(corrs.size());
  return out;
}

}  // namespace

std::size_t count_inliers(const FundamentalMatrix& f, std::span<const Correspondence> corrs,
                          double epsilon) noexcept {
  const Eigen::Matrix3d& m = f.matrix();
  std::size_t n = 0;
  for (const Correspondence& c : corrs) n += is_inlier(m, c, epsilon) ? 1 : 0;
  return n;
}

RigidityResult ransac_rigidity_serial(std::span<const Correspondence> corrs,
                                      const RansacConfig& cfg) {
  cfg.validate();
  if (corrs.size() < cfg.min_correspondences) return {std::nullopt, 0, corrs.size(), 0.0};
  Hypothesis best;
  for (int it = 0; it < cfg.iterations; ++it) {
    Hypothesis h = evaluate_iteration(corrs, cfg, it);
    if (h.beats(best)) best = std::move(h);
  }
  return finish(corrs, cfg, std::move(best));
}

RigidityResult ransac_rigidity(std::span<const Correspondence> corrs, const RansacConfig& cfg,
                               int jobs) {
  cfg.validate();
  const int threads = resolve_jobs(jobs);
  if (threads == 1 || omp_in_parallel()) return ransac_rigidity_serial(corrs, cfg);
  if (corrs.size() < cfg.min_correspondences) return {std::nullopt, 0, corrs.size(), 0.0};

  Hypothesis best;
#pragma omp parallel num_threads(threads)
  {
    Hypothesis local;
#pragma omp for schedule(static)
    for (int it = 0; it < cfg.iterations; ++it) {
      Hypothesis h = evaluate_iteration(corrs, cfg, it);
      if (h.beats(local)) local = std::move(h);
    }
#pragma omp critical(verikit_ransac_merge)
    {
      if (local.beats(best)) best = std::move(local);
    }
  }
  return finish(corrs, cfg, std::move(best));
}

std::vector<Correspondence> flow_to_correspondences(const FlowField& flow, int stride,
                                                    std::size_t max_count, std::uint64_t seed) {
  if (stride < 1) throw ValidationError("stride must be >= 1");
  std::vector<Correspondence> all;
  for (int y = 0; y < flow.height(); y += stride)
    for (int x = 0; x < flow.width(); x += stride) {
      const FlowVector& f = flow.at(x, y);
      if (f.valid) all.push_back({Vec2(x, y), Vec2(f.u, f.v)});
    }
  if (all.size() <= max_count) return all;

  // Partial Fisher-Yates over indices, then restore grid order.
  std::vector<std::size_t> idx(all.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < max_count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(max_count);
  std::sort(idx.begin(), idx.end());
  std::vector<Correspondence> out;
  out.reserve(max_count);
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace verikit
