#pragma once

#include "verikit/core/flow.hpp"
#include "verikit/core/image.hpp"
#include "verikit/verify/batch.hpp"

namespace verikit {

struct NccMatcherOptions {
  int patch_radius = 2;
  double min_score = 0.8;  ///< best NCC must exceed this for a valid match
  int max_pixels = 128 * 128;  ///< per image

  void validate() const;
};

/// Dense matches by brute force: every template pixel (inside `mask` when
/// given) is matched to the crop pixel whose (2r+1)^2 patch has the highest
/// NCC with its own, over all channels, edges clamped. Flat patches and
/// matches at or below min_score are invalid. Ties go to the lowest
/// row-major crop index. Images above max_pixels are rejected.
FlowField exhaustive_ncc_flow(const Image& templ, const Mask* mask, const Image& crop,
                              const NccMatcherOptions& options = {}, int jobs = 0);

/// Single-threaded reference.
FlowField exhaustive_ncc_flow_serial(const Image& templ, const Mask* mask, const Image& crop,
                                     const NccMatcherOptions& options = {});

/// Replaces every flow of the suite with exhaustive-ncc matches from each
/// detection's proposed-class templates (the `viewpoints` subset when
/// nonzero) into its square crop. Returns the number of flows computed.
std::size_t match_suite_flows(Suite& suite, const NccMatcherOptions& options,
                              std::size_t viewpoints = 0, int jobs = 0);

}  // namespace verikit
