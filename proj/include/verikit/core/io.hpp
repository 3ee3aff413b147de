#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "verikit/core/detection.hpp"
#include "verikit/core/flow.hpp"
#include "verikit/core/image.hpp"

namespace verikit::io {

// Images: PNG (8/16-bit gray, gray+alpha, RGB, RGBA) and binary PPM (P6).
// Alpha is dropped; gray+alpha becomes 1 channel, RGBA 3 channels.
Image read_image(const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Mask stored as an 8-bit gray PNG; nonzero pixels are foreground.
Mask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const Mask& mask);

// FlowField binary format, little-endian:
//   "VFLW" | u32 width | u32 height | width*height * (f32 u | f32 v | u8 valid)
// Invalid entries are written with zero coordinates.
std::vector<std::uint8_t> encode_flow(const FlowField& flow);
/// `source` names the origin in error messages.
FlowField decode_flow(std::span<const std::uint8_t> bytes, const std::string& source);
FlowField read_flow(const std::filesystem::path& path);
void write_flow(const std::filesystem::path& path, const FlowField& flow);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Annotations are JSON lines. Detection lines carry
/// {detection_id, class_id, box:[x_min,y_min,x_max,y_max], confidence} and
/// ground-truth lines {"type":"ground_truth", class_id, box}. Both take an
/// optional integer "scene" (default 0).
struct Annotations {
  std::map<int, std::vector<GroundTruth>> ground_truth;
  std::map<int, std::vector<Detection>> detections;

  std::vector<int> scene_ids() const;
};

Annotations parse_annotations(std::string_view text, const std::string& source);
Annotations read_annotations(const std::filesystem::path& path);
std::string format_annotations(const Annotations& annotations);

std::string detection_line(const Detection& d, int scene_id);
std::string ground_truth_line(const GroundTruth& g, int scene_id);

}  // namespace verikit::io
