#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "masklift/camera.hpp"
#include "masklift/lift.hpp"

namespace masklift {

enum class MaskSource {
  kLabelImage,    // masks/<id>.png (16-bit labels) + masks/<id>.json confidences
  kBinaryMasks,   // masks/<id>/*.png (8-bit, 255 = member) + masks/<id>/scores.json
};

struct FrameRecord {
  long long id = 0;
  std::string basename;
  std::filesystem::path depth_path;
  std::filesystem::path pose_path;
  std::filesystem::path mask_path;
  MaskSource mask_source = MaskSource::kLabelImage;
  CameraPose pose;
};

struct LoadOptions {
  double depth_divisor = 1000.0;
  int frame_stride = 1;
  bool strict = false;
};

/// A scene directory laid out as
///   root/intrinsic.txt, root/depth/*.png, root/pose/*.txt, root/masks/...
/// Frames are sorted by their integer basename.
struct SceneDataset {
  std::filesystem::path root;
  CameraIntrinsics intrinsics;
  double depth_divisor = 1000.0;
  std::vector<FrameRecord> frames;
  std::vector<std::string> warnings;
};

/// Throws kLoad for a missing root, missing or invalid intrinsics, zero usable
/// frames, or (when strict) any per-frame problem.
SceneDataset load_scene(const std::filesystem::path& root, const LoadOptions& opts = {});

struct LoadedFrame {
  DepthFrame depth;
  MaskImage mask;
};

/// Reads depth and masks of one frame; checks that their dimensions agree.
LoadedFrame load_frame(const SceneDataset& scene, const FrameRecord& record);

MaskImage read_label_mask(const std::filesystem::path& png,
                          const std::filesystem::path& confidence_json);
RawMaskSet read_binary_masks(const std::filesystem::path& directory);
void write_label_mask(const MaskImage& mask, const std::filesystem::path& png,
                      const std::filesystem::path& confidence_json);

DepthFrame read_depth_png(const std::filesystem::path& path, double depth_divisor);
void write_depth_png(const DepthFrame& frame, const std::filesystem::path& path);

/// Whitespace-separated 4x4 row-major matrix. Throws kParse unless exactly 16
/// numbers are present.
Eigen::Matrix4d read_matrix4(const std::filesystem::path& path);
void write_matrix4(const Eigen::Matrix4d& m, const std::filesystem::path& path);

/// Over-segmentation text export: one segment ID per line.
void write_segments(const std::vector<std::uint32_t>& segment_id,
                    const std::filesystem::path& path);
std::vector<std::uint32_t> read_segments(const std::filesystem::path& path);

/// Writes `text` to `path`, throwing kIo on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace masklift
