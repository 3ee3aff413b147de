#include "verikit/core/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "verikit/util/error.hpp"

namespace verikit::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

void write_text(const fs::path& path, std::string_view text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

namespace {

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

Image read_png(const fs::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str()))
    throw ValidationError(path.string() + ": " + img.message);
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const int channels = color ? 3 : 1;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw ValidationError(path.string() + ": " + msg);
  }
  std::vector<float> data(buffer.size());
  std::transform(buffer.begin(), buffer.end(), data.begin(),
                 [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
  return Image(static_cast<int>(img.width), static_cast<int>(img.height), channels,
               std::move(data));
}

void write_png(const fs::path& path, const Image& image) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(image.data().size());
  std::transform(image.data().begin(), image.data().end(), buffer.begin(), to_byte);
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, buffer.data(), 0, nullptr))
    throw Error(path.string() + ": " + img.message);
}

Mask read_mask_png(const fs::path& path) {
  const Image img = read_png(path);
  Mask mask(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) mask.set(x, y, img.at(x, y, 0) > 0.0f);
  return mask;
}

void write_mask_png(const fs::path& path, const Mask& mask) {
  Image img(mask.width(), mask.height(), 1);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) img.at(x, y) = mask.at(x, y) ? 1.0f : 0.0f;
  write_png(path, img);
}

Image read_ppm(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> FormatError {
    return FormatError(path.string(), pos, what);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw fail("not a binary PPM (P6)");
  }
  pos = 2;
  auto next_int = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("malformed PPM header");
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > (1L << 24)) throw fail("PPM header value too large");
      ++pos;
    }
    return value;
  };
  const long width = next_int();
  const long height = next_int();
  const long maxval = next_int();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) throw fail("invalid PPM header");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("malformed PPM header");
  ++pos;
  const std::size_t sample_size = maxval < 256 ? 1 : 2;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (bytes.size() - pos < count * sample_size) {
    pos = bytes.size();
    throw fail("truncated PPM pixel data");
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned raw = sample_size == 1
                             ? bytes[pos + i]
                             : (static_cast<unsigned>(bytes[pos + 2 * i]) << 8) | bytes[pos + 2 * i + 1];
    data[i] = std::min(1.0f, static_cast<float>(raw) / static_cast<float>(maxval));
  }
  return Image(static_cast<int>(width), static_cast<int>(height), 3, std::move(data));
}

void write_ppm(const fs::path& path, const Image& image) {
  std::string header = "P6\n" + std::to_string(image.width()) + " " +
                       std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c)
        bytes.push_back(to_byte(image.at(x, y, image.channels() == 3 ? c : 0)));
  write_bytes(path, bytes);
}

Image read_image(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".ppm") return read_ppm(path);
  return read_png(path);
}

namespace {

constexpr std::size_t kFlowHeader = 12;
constexpr std::size_t kFlowRecord = 9;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_flow(const FlowField& flow) {
  std::vector<std::uint8_t> out;
  out.reserve(kFlowHeader + kFlowRecord * flow.size());
  for (char c : {'V', 'F', 'L', 'W'}) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, static_cast<std::uint32_t>(flow.width()));
  put_u32(out, static_cast<std::uint32_t>(flow.height()));
  for (const FlowVector& f : flow.entries()) {
    put_u32(out, std::bit_cast<std::uint32_t>(f.valid ? f.u : 0.0f));
    put_u32(out, std::bit_cast<std::uint32_t>(f.valid ? f.v : 0.0f));
    out.push_back(f.valid ? 1 : 0);
  }
  return out;
}

FlowField decode_flow(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < 4) throw FormatError(source, bytes.size(), "truncated flow header");
  if (std::memcmp(bytes.data(), "VFLW", 4) != 0) throw FormatError(source, 0, "bad magic, expected VFLW");
  if (bytes.size() < kFlowHeader) throw FormatError(source, bytes.size(), "truncated flow header");
  const std::uint32_t width = get_u32(bytes, 4);
  const std::uint32_t height = get_u32(bytes, 8);
  if (width > (1u << 16) || height > (1u << 16))
    throw FormatError(source, 4, "implausible flow dimensions");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  const std::size_t expected = kFlowHeader + kFlowRecord * n;
  if (bytes.size() < expected) {
    const std::size_t complete = (bytes.size() - kFlowHeader) / kFlowRecord;
    throw FormatError(source, kFlowHeader + complete * kFlowRecord, "truncated flow record");
  }
  if (bytes.size() > expected) throw FormatError(source, expected, "trailing bytes after flow records");
  std::vector<FlowVector> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = kFlowHeader + i * kFlowRecord;
    const std::uint8_t valid = bytes[at + 8];
    if (valid > 1) throw FormatError(source, at + 8, "invalid validity byte");
    if (valid == 0) continue;
    const float u = std::bit_cast<float>(get_u32(bytes, at));
    const float v = std::bit_cast<float>(get_u32(bytes, at + 4));
    if (!std::isfinite(u) || !std::isfinite(v))
      throw FormatError(source, at, "non-finite coordinate in valid flow entry");
    entries[i] = {u, v, true};
  }
  return FlowField(static_cast<int>(width), static_cast<int>(height), std::move(entries));
}

FlowField read_flow(const fs::path& path) { return decode_flow(read_bytes(path), path.string()); }

void write_flow(const fs::path& path, const FlowField& flow) { write_bytes(path, encode_flow(flow)); }

std::vector<int> Annotations::scene_ids() const {
  std::set<int> ids;
  for (const auto& [id, _] : ground_truth) ids.insert(id);
  for (const auto& [id, _] : detections) ids.insert(id);
  return {ids.begin(), ids.end()};
}

namespace {

Box parse_box(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("box must be [x_min,y_min,x_max,y_max]");
  return make_box(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

json box_json(const Box& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

}  // namespace

std::string detection_line(const Detection& d, int scene_id) {
  json j;
  j["scene"] = scene_id;
  j["detection_id"] = d.detection_id;
  j["class_id"] = d.class_id;
  j["box"] = box_json(d.box);
  j["confidence"] = d.confidence;
  return j.dump();
}

std::string ground_truth_line(const GroundTruth& g, int scene_id) {
  json j;
  j["type"] = "ground_truth";
  j["scene"] = scene_id;
  j["class_id"] = g.class_id;
  j["box"] = box_json(g.box);
  return j.dump();
}

Annotations parse_annotations(std::string_view text, const std::string& source) {
  Annotations out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::set<std::int64_t> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const int scene = j.value("scene", 0);
      const std::string type = j.value("type", std::string(j.contains("detection_id") ? "detection" : "ground_truth"));
      if (type == "ground_truth") {
        out.ground_truth[scene].push_back({parse_box(j.at("box")), j.at("class_id").get<int>()});
      } else if (type == "detection") {
        Detection d;
        d.detection_id = j.at("detection_id").get<std::int64_t>();
        d.class_id = j.at("class_id").get<int>();
        d.box = parse_box(j.at("box"));
        d.confidence = j.at("confidence").get<double>();
        validate_detection(d);
        if (!ids.insert(d.detection_id).second)
          throw ValidationError("duplicate detection_id " + std::to_string(d.detection_id));
        out.detections[scene].push_back(d);
      } else {
        throw ValidationError("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

Annotations read_annotations(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  return parse_annotations(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                           path.string());
}

std::string format_annotations(const Annotations& annotations) {
  std::string out;
  for (int scene : annotations.scene_ids()) {
    if (auto it = annotations.ground_truth.find(scene); it != annotations.ground_truth.end())
      for (const GroundTruth& g : it->second) out += ground_truth_line(g, scene) + "\n";
    if (auto it = annotations.detections.find(scene); it != annotations.detections.end())
      for (const Detection& d : it->second) out += detection_line(d, scene) + "\n";
  }
  return out;
}

}  // namespace verikit::io
