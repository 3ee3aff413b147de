#include <gtest/gtest.h>

#include <cstring>

#include "support.hpp"
#include "verikit/core/box.hpp"
#include "verikit/core/detection.hpp"
#include "verikit/core/io.hpp"
#include "verikit/core/warp.hpp"
#include "verikit/util/error.hpp"

using namespace verikit;
using verikit::testing::TempDir;

namespace {

// Little-endian VFLW written byte by byte, independent of encode_flow.
std::vector<std::uint8_t> handmade_vflw(std::uint32_t w, std::uint32_t h,
                                        const std::vector<std::tuple<float, float, std::uint8_t>>& rec) {
  std::vector<std::uint8_t> out = {'V', 'F', 'L', 'W'};
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto f32 = [&](float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    u32(bits);
  };
  u32(w);
  u32(h);
  for (const auto& [u, v, valid] : rec) {
    f32(u);
    f32(v);
    out.push_back(valid);
  }
  return out;
}

}  // namespace

TEST(Box, IouOfKnownBoxes) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {1, 1, 3, 3}), 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 1, 1}, {2, 2, 3, 3}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
  EXPECT_THROW(make_box(1, 0, 0, 1), ValidationError);
}

TEST(Box, IouIsSymmetricAndBounded) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    auto rb = [&] {
      const double x = rng.uniform(0, 10), y = rng.uniform(0, 10);
      return Box{x, y, x + rng.uniform(0.1, 5), y + rng.uniform(0.1, 5)};
    };
    const Box a = rb(), b = rb();
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
  }
}

TEST(Crop, WindowIsCenteredSquare) {
  const CropWindow w = crop_window({10.0, 20.0, 30.5, 25.0});
  EXPECT_EQ(w.side, 21);
  EXPECT_EQ(w.x0, 10);
  EXPECT_EQ(w.y0, 12);
  EXPECT_THROW(crop_window({1, 1, 1, 2}), ValidationError);
}

TEST(Crop, ZeroFillsOutsideScene) {
  Image scene(4, 4, 1, 1.0f);
  const Image crop = crop_to_square(scene, {-2.0, -2.0, 2.0, 2.0});
  ASSERT_EQ(crop.width(), 4);
  EXPECT_EQ(crop.at(0, 0), 0.0f);
  EXPECT_EQ(crop.at(3, 3), 1.0f);
  EXPECT_THROW(crop_to_square(scene, {10, 10, 12, 12}), ValidationError);
}

TEST(Splat, IdentityFlowReproducesTemplate) {
  Rng rng(1);
  const Image t = verikit::testing::random_image(rng, 7, 5, 3);
  const Image out = apply_flow(t, FlowField::identity(7, 5), 7, 5);
  EXPECT_EQ(out, t);
}

TEST(Splat, LaterWritesWinAndOutOfRangeIsDropped) {
  Image t(2, 1, 1);
  t.at(0, 0) = 0.25f;
  t.at(1, 0) = 0.75f;
  FlowField f(2, 1);
  f.set(0, 0, 1.2, 0.4);
  f.set(1, 0, 0.6, -0.2);
  const SplatResult s = splat_flow(t, f, 2, 1);
  EXPECT_EQ(s.image.at(1, 0), 0.75f);
  EXPECT_TRUE(s.written.at(1, 0));
  EXPECT_FALSE(s.written.at(0, 0));
  FlowField off(2, 1);
  off.set(0, 0, 5, 5);
  EXPECT_EQ(splat_flow(t, off, 2, 1).written.count(), 0u);
}

TEST(Vflw, DecodesHandmadeBytes) {
  const auto bytes = handmade_vflw(2, 1, {{1.5f, -2.0f, 1}, {0.0f, 0.0f, 0}});
  const FlowField f = io::decode_flow(bytes, "mem");
  ASSERT_EQ(f.width(), 2);
  ASSERT_EQ(f.height(), 1);
  EXPECT_TRUE(f.at(0, 0).valid);
  EXPECT_EQ(f.at(0, 0).u, 1.5f);
  EXPECT_EQ(f.at(0, 0).v, -2.0f);
  EXPECT_FALSE(f.at(1, 0).valid);
  EXPECT_EQ(io::encode_flow(f), bytes);
}

TEST(Vflw, RoundTripsRandomFields) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 1 + static_cast<int>(rng.index(40)), h = 1 + static_cast<int>(rng.index(40));
    FlowField f(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (rng.bernoulli(0.7)) f.set(x, y, rng.uniform(-100, 100), rng.uniform(-100, 100));
    EXPECT_EQ(io::decode_flow(io::encode_flow(f), "mem"), f);
  }
}

TEST(Vflw, CorruptionNamesByteOffset) {
  auto bytes = handmade_vflw(2, 2, {{1, 1, 1}, {2, 2, 1}, {3, 3, 0}, {4, 4, 1}});
  auto expect_offset = [](const std::vector<std::uint8_t>& b, std::uint64_t offset) {
    try {
      io::decode_flow(b, "flows/x.vflw");
      ADD_FAILURE() << "no error";
    } catch (const FormatError& e) {
      EXPECT_EQ(e.offset(), offset) << e.what();
      EXPECT_NE(std::string(e.what()).find("flows/x.vflw"), std::string::npos);
    }
  };
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  expect_offset(bad_magic, 0);
  expect_offset(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10), 10);
  expect_offset(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 3), 12 + 3 * 9);
  auto bad_valid = bytes;
  bad_valid[12 + 9 + 8] = 7;
  expect_offset(bad_valid, 12 + 9 + 8);
  auto trailing = bytes;
  trailing.push_back(0);
  expect_offset(trailing, bytes.size());
  const float nan = std::numeric_limits<float>::quiet_NaN();
  expect_offset(handmade_vflw(1, 1, {{nan, 0, 1}}), 12);
  // a NaN in an invalid entry is ignored
  EXPECT_NO_THROW(io::decode_flow(handmade_vflw(1, 1, {{nan, 0, 0}}), "mem"));
}

TEST(ImageIo, PngAndPpmRoundTripAt8Bits) {
  TempDir dir("imageio");
  Rng rng(4);
  Image img(9, 6, 3);
  for (float& v : img.data()) v = static_cast<float>(rng.index(256)) / 255.0f;
  io::write_png(dir.path() / "a.png", img);
  io::write_ppm(dir.path() / "a.ppm", img);
  EXPECT_EQ(io::read_image(dir.path() / "a.png"), img);
  EXPECT_EQ(io::read_image(dir.path() / "a.ppm"), img);
  Image gray(5, 5, 1);
  for (float& v : gray.data()) v = static_cast<float>(rng.index(256)) / 255.0f;
  io::write_png(dir.path() / "g.png", gray);
  EXPECT_EQ(io::read_image(dir.path() / "g.png"), gray);
}

TEST(ImageIo, MaskRoundTrip) {
  TempDir dir("maskio");
  Mask m(4, 3);
  m.set(1, 2, true);
  m.set(3, 0, true);
  io::write_mask_png(dir.path() / "m.png", m);
  EXPECT_EQ(io::read_mask_png(dir.path() / "m.png"), m);
}

TEST(ImageIo, TruncatedPpmIsFormatError) {
  TempDir dir("ppm");
  io::write_text(dir.path() / "t.ppm", "P6\n4 4\n255\nabc");
  EXPECT_THROW(io::read_image(dir.path() / "t.ppm"), FormatError);
  EXPECT_THROW(io::read_image(dir.path() / "missing.png"), ValidationError);
}

TEST(Annotations, ParsesBothRecordKinds) {
  const std::string text =
      "{\"detection_id\": 3, \"class_id\": 1, \"box\": [0, 0, 10, 10], \"confidence\": 0.7, \"scene\": 2}\n"
      "\n"
      "{\"type\": \"ground_truth\", \"class_id\": 1, \"box\": [1, 1, 9, 9], \"scene\": 2}\n"
      "{\"detection_id\": 4, \"class_id\": 0, \"box\": [5, 5, 8, 9], \"confidence\": 0.2}\n";
  const io::Annotations a = io::parse_annotations(text, "ann");
  ASSERT_EQ(a.detections.at(2).size(), 1u);
  EXPECT_EQ(a.detections.at(2)[0].detection_id, 3);
  EXPECT_EQ(a.detections.at(0)[0].class_id, 0);
  EXPECT_EQ(a.ground_truth.at(2)[0].box, (Box{1, 1, 9, 9}));
  EXPECT_EQ(a.scene_ids(), (std::vector<int>{0, 2}));
  EXPECT_EQ(io::parse_annotations(io::format_annotations(a), "again").detections, a.detections);
}

TEST(Annotations, RejectsMalformedLines) {
  EXPECT_THROW(io::parse_annotations("{\"detection_id\":1}\n", "x"), ValidationError);
  EXPECT_THROW(io::parse_annotations("not json\n", "x"), ValidationError);
  EXPECT_THROW(io::parse_annotations(
                   "{\"detection_id\":1,\"class_id\":0,\"box\":[0,0,1,1],\"confidence\":1.5}\n", "x"),
               ValidationError);
  EXPECT_THROW(io::parse_annotations(
                   "{\"detection_id\":1,\"class_id\":0,\"box\":[0,0,1,1],\"confidence\":0.5}\n"
                   "{\"detection_id\":1,\"class_id\":0,\"box\":[0,0,1,1],\"confidence\":0.5}\n",
                   "x"),
               ValidationError);
}

TEST(Scene, ValidateRejectsDanglingFlowKeys) {
  SceneRecord s;
  s.detections.push_back({1, 0, {0, 0, 4, 4}, 0.5});
  std::vector<TemplateSet> sets(1);
  sets[0].class_id = 0;
  sets[0].templates.push_back(Image(4, 4, 1));
  s.flows.emplace(FlowKey{1, 0, 0}, FlowField(4, 4));
  EXPECT_NO_THROW(validate_scene(s, sets));
  s.flows.emplace(FlowKey{2, 0, 0}, FlowField(4, 4));
  EXPECT_THROW(validate_scene(s, sets), ValidationError);
}
