#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "masklift/dataset.hpp"
#include "masklift/error.hpp"
#include "masklift/ply.hpp"
#include "masklift/png_io.hpp"
#include "temp_dir.hpp"

using namespace masklift;
namespace fs = std::filesystem;

namespace {

std::uint32_t bits(float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, sizeof u);
  return u;
}

void write_frame(const fs::path& root, const std::string& stem, bool with_mask = true,
                 const std::string& pose_text = "") {
  fs::create_directories(root / "depth");
  fs::create_directories(root / "pose");
  fs::create_directories(root / "masks");
  write_depth_png(DepthFrame{4, 3, std::vector<std::uint16_t>(12, 1500), 1000.0},
                  root / "depth" / (stem + ".png"));
  if (pose_text.empty()) {
    write_matrix4(Eigen::Matrix4d::Identity(), root / "pose" / (stem + ".txt"));
  } else {
    std::ofstream(root / "pose" / (stem + ".txt")) << pose_text;
  }
  if (with_mask) {
    MaskImage m{4, 3, std::vector<LocalId>(12, 0), {{2, 0.75}}};
    m.labels[5] = 2;
    write_label_mask(m, root / "masks" / (stem + ".png"), root / "masks" / (stem + ".json"));
  }
}

void write_intrinsics(const fs::path& root) {
  Eigen::Matrix4d k = Eigen::Matrix4d::Identity();
  k(0, 0) = 5;
  k(1, 1) = 6;
  k(0, 2) = 2;
  k(1, 2) = 1.5;
  write_matrix4(k, root / "intrinsic.txt");
}

}  // namespace

TEST_CASE("PLY round trip is bit exact") {
  testing::TempDir dir("ply");
  SUBCASE("empty") {
    write_ply({}, dir / "e.ply");
    CHECK(read_ply(dir / "e.ply").empty());
  }
  SUBCASE("one point") {
    LabeledCloud c;
    c.push_back({0.25, -1.5, 3.0}, 42);
    write_ply(c, dir / "one.ply");
    const auto back = read_ply(dir / "one.ply");
    REQUIRE(back.size() == 1);
    CHECK(back.points[0] == c.points[0]);
    CHECK(back.labels[0] == 42);
  }
  SUBCASE("a million points") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> coord(-100.0f, 100.0f);
    std::uniform_int_distribution<Label> lab(0, 5000000);
    LabeledCloud c;
    c.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) {
      c.push_back({coord(rng), coord(rng), coord(rng)}, lab(rng));
    }
    write_ply(c, dir / "big.ply");
    const auto back = read_ply(dir / "big.ply");
    REQUIRE(back.size() == c.size());
    CHECK(back.labels == c.labels);
    bool exact = true;
    for (std::size_t i = 0; i < c.size() && exact; ++i) {
      for (int d = 0; d < 3; ++d) {
        exact = exact && bits(static_cast<float>(back.points[i][d])) ==
                             bits(static_cast<float>(c.points[i][d])) &&
                back.points[i][d] == c.points[i][d];
      }
    }
    CHECK(exact);
  }
}

TEST_CASE("PLY header errors carry the line number") {
  testing::TempDir dir("plyerr");
  std::ofstream(dir / "bad.ply") << "ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
                                    "property float x\nproperty flot y\nend_header\n";
  try {
    read_ply(dir / "bad.ply");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find(":5:") != std::string::npos);
  }
  std::ofstream(dir / "magic.ply") << "plx\n";
  CHECK_THROWS_AS(read_ply(dir / "magic.ply"), Error);
}

TEST_CASE("read_ply accepts ASCII files") {
  testing::TempDir dir("ascii");
  std::ofstream(dir / "a.ply") << "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\n"
                                  "property float x\nproperty float y\nproperty float z\n"
                                  "property uint label\nend_header\n1 2 3 7\n4 5 6 0\n";
  const auto c = read_ply(dir / "a.ply");
  REQUIRE(c.size() == 2);
  CHECK(c.points[1] == Point3(4, 5, 6));
  CHECK(c.labels == std::vector<Label>{7, 0});
}

TEST_CASE("write_ply reports unwritable paths") {
  try {
    write_ply({}, "/nonexistent-dir/x.ply");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

TEST_CASE("label_color is deterministic") {
  CHECK(label_color(7) == label_color(7));
  CHECK(label_color(7) != label_color(8));
}

TEST_CASE("PNG round trips 8- and 16-bit images") {
  testing::TempDir dir("png");
  GrayImage img{3, 2, 16, {0, 1, 65535, 300, 4000, 12}};
  write_png_gray(dir / "a.png", img);
  const auto back = read_png_gray(dir / "a.png");
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.bit_depth == 16);
  CHECK(back.pixels == img.pixels);

  GrayImage small{2, 2, 8, {0, 255, 17, 3}};
  write_png_gray(dir / "b.png", small);
  CHECK(read_png_gray(dir / "b.png").pixels == small.pixels);
  CHECK_THROWS_AS(read_png_gray(dir / "missing.png"), Error);
}

TEST_CASE("matrix files need exactly sixteen numbers") {
  testing::TempDir dir("mat");
  Eigen::Matrix4d m;
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 0.1;
  write_matrix4(m, dir / "m.txt");
  CHECK(read_matrix4(dir / "m.txt") == m);
  std::ofstream(dir / "short.txt") << "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0\n";
  CHECK_THROWS_AS(read_matrix4(dir / "short.txt"), Error);
  std::ofstream(dir / "word.txt") << "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 x\n";
  CHECK_THROWS_AS(read_matrix4(dir / "word.txt"), Error);
}

TEST_CASE("segment files round trip") {
  testing::TempDir dir("seg");
  const std::vector<std::uint32_t> ids{1, 1, 2, 3, 2};
  write_segments(ids, dir / "s.txt");
  CHECK(read_segments(dir / "s.txt") == ids);
}

TEST_CASE("load_scene discovers complete frames in id order") {
  testing::TempDir dir("scene3");
  write_intrinsics(dir.path());
  for (const char* stem : {"000020", "000003", "000010"}) write_frame(dir.path(), stem);
  const auto scene = load_scene(dir.path());
  REQUIRE(scene.frames.size() == 3);
  CHECK(scene.frames[0].id == 3);
  CHECK(scene.frames[1].id == 10);
  CHECK(scene.frames[2].id == 20);
  CHECK(scene.warnings.empty());
  CHECK(scene.intrinsics.fx == 5);
  CHECK(scene.intrinsics.cy == 1.5);

  const auto again = load_scene(dir.path());
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.frames[i].depth_path == scene.frames[i].depth_path);

  const auto loaded = load_frame(scene, scene.frames[0]);
  CHECK(loaded.depth.width == 4);
  CHECK(loaded.mask.at(1, 1) == 2);
  CHECK(loaded.mask.confidences.at(2) == 0.75);

  LoadOptions every_other;
  every_other.frame_stride = 2;
  CHECK(load_scene(dir.path(), every_other).frames.size() == 2);
}

TEST_CASE("load_scene skips incomplete frames with a warning") {
  testing::TempDir dir("scene_missing");
  write_intrinsics(dir.path());
  write_frame(dir.path(), "000000");
  write_frame(dir.path(), "000001", false);
  write_frame(dir.path(), "000002");
  const auto scene = load_scene(dir.path());
  CHECK(scene.frames.size() == 2);
  REQUIRE(scene.warnings.size() == 1);
  CHECK(scene.warnings[0].find("000001") != std::string::npos);
}

TEST_CASE("load_scene handles malformed poses per strictness") {
  testing::TempDir dir("scene_pose");
  write_intrinsics(dir.path());
  write_frame(dir.path(), "000000");
  write_frame(dir.path(), "000001", true, "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0\n");
  const auto scene = load_scene(dir.path());
  CHECK(scene.frames.size() == 1);
  CHECK(scene.warnings.size() == 1);

  LoadOptions strict;
  strict.strict = true;
  try {
    load_scene(dir.path(), strict);
    FAIL("expected load error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLoad);
  }
}

TEST_CASE("load_scene fatal errors") {
  testing::TempDir dir("scene_fatal");
  auto expect_load = [](const fs::path& p) {
    try {
      load_scene(p);
      FAIL("expected load error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kLoad);
    }
  };
  expect_load(dir / "nope");
  write_frame(dir.path(), "000000");
  expect_load(dir.path());  // no intrinsics
  fs::remove_all(dir / "depth");
  write_intrinsics(dir.path());
  expect_load(dir.path());  // no usable frames
}

TEST_CASE("binary mask directories are resolved by confidence") {
  testing::TempDir dir("binmask");
  write_intrinsics(dir.path());
  write_frame(dir.path(), "000000", false);
  const auto mdir = dir / "masks" / "000000";
  fs::create_directories(mdir);
  GrayImage a{4, 3, 8, std::vector<std::uint16_t>(12, 0)};
  GrayImage b = a;
  a.pixels[0] = a.pixels[1] = 255;
  b.pixels[1] = b.pixels[2] = 255;
  write_png_gray(mdir / "0.png", a);
  write_png_gray(mdir / "1.png", b);
  std::ofstream(mdir / "scores.json") << "[0.4, 0.9]";
  const auto scene = load_scene(dir.path());
  REQUIRE(scene.frames.size() == 1);
  CHECK(scene.frames[0].mask_source == MaskSource::kBinaryMasks);
  const auto loaded = load_frame(scene, scene.frames[0]);
  CHECK(loaded.mask.at(0, 0) == 1);
  CHECK(loaded.mask.at(1, 0) == 2);
  CHECK(loaded.mask.at(2, 0) == 2);
  CHECK(loaded.mask.at(3, 0) == 0);
}
