#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "verikit/core/flow.hpp"
#include "verikit/geometry/fundamental.hpp"

namespace verikit {

struct RansacConfig {
  int iterations = 1000;
  double epsilon = 1.0;  ///< inlier threshold on epipolar_distance, pixels
  std::uint64_t seed = 0;
  std::size_t min_correspondences = 8;
  int stride = 1;             ///< flow subsampling grid step
  std::size_t max_count = 500;  ///< correspondence cap after striding

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

inline constexpr std::size_t kNoCorrespondenceCap = std::numeric_limits<std::size_t>::max();

struct RigidityResult {
  std::optional<FundamentalMatrix> model;
  std::size_t inliers = 0;
  std::size_t total = 0;
  double inlier_fraction = 0.0;
};

/// RANSAC estimate of the fraction of correspondences consistent with one
/// fundamental matrix. Iteration k draws its 8-sample from a generator seeded
/// by (cfg.seed, k); the best hypothesis (most inliers, lowest k on ties) is
/// refit once on its inliers and the refit is kept unless it loses inliers.
/// Result is identical for every `jobs` value.
RigidityResult ransac_rigidity(std::span<const Correspondence> corrs, const RansacConfig& cfg,
                               int jobs = 0);

/// Single-threaded reference implementation of ransac_rigidity.
RigidityResult ransac_rigidity_serial(std::span<const Correspondence> corrs,
                                      const RansacConfig& cfg);

/// Number of correspondences within `epsilon` of `f`.
std::size_t count_inliers(const FundamentalMatrix& f, std::span<const Correspondence> corrs,
                          double epsilon) noexcept;

/// Valid flow entries on a regular `stride` grid; when more than `max_count`
/// survive, a seeded uniform subsample kept in grid order.
std::vector<Correspondence> flow_to_correspondences(const FlowField& flow, int stride,
                                                    std::size_t max_count, std::uint64_t seed);

}  // namespace verikit
