#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "masklift/camera.hpp"
#include "masklift/cloud.hpp"
#include "masklift/lift.hpp"

namespace masklift {

struct BoxPrimitive {
  Label id = 1;
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Ones();
};

/// Parallelogram origin + s * edge_u + t * edge_v, s, t in [0, 1].
struct PlanePrimitive {
  Label id = 1;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d edge_u = Eigen::Vector3d::UnitX();
  Eigen::Vector3d edge_v = Eigen::Vector3d::UnitY();
};

using Primitive = std::variant<BoxPrimitive, PlanePrimitive>;

struct PerturbOptions {
  double split_probability = 0.0;
  bool permute_ids = false;
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  std::vector<CameraPose> poses;
  int width = 320;
  int height = 240;
  CameraIntrinsics intrinsics{300.0, 300.0, 160.0, 120.0};
  double depth_divisor = 1000.0;
  std::uint64_t seed = 0;
  PerturbOptions perturb;
  /// Voxel size of the ground-truth cloud written next to the scene.
  double gt_voxel = 0.05;

  /// Throws kValidation with a JSON-style field path on the first problem.
  void validate() const;
};

/// Parses the JSON scene description; see docs/scene_spec.md.
SceneSpec parse_scene_spec(const std::string& json_text);
std::string scene_spec_to_json(const SceneSpec& spec);

/// Look-at poses on a horizontal circle (world z up), camera looking at `target`.
std::vector<CameraPose> orbit_poses(const Eigen::Vector3d& center, double radius, double height,
                                    std::size_t count, const Eigen::Vector3d& target);

/// Camera pose at `eye` looking at `target` with world +z as up.
CameraPose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target);

/// Eight boxes in two rows seen from 16 orbiting poses; the default synth scene.
SceneSpec default_scene_spec();

struct RenderedFrame {
  DepthFrame depth;
  /// Frame-local labels, instance IDs remapped to 1..k in ascending order.
  MaskImage gt_mask;
  /// Frame-local ID -> scene instance ID.
  std::map<LocalId, Label> instance_of;
};

/// Ray casts every pixel against all primitives; nearest hit wins. Depth is
/// camera z, floored to raw units.
RenderedFrame render_depth(const SceneSpec& spec, std::size_t pose_index, unsigned threads = 1);

/// Nearest ray hit along a world-space ray: (t, instance id).
std::optional<std::pair<double, Label>> cast_ray(const std::vector<Primitive>& primitives,
                                                 const Eigen::Vector3d& origin,
                                                 const Eigen::Vector3d& dir);

/// Instance whose surface lies closest to p, with that distance.
std::pair<Label, double> nearest_instance(const std::vector<Primitive>& primitives,
                                          const Point3& p);

/// Splits masks along random axis-aligned image lines and/or permutes IDs.
/// The output partition always refines the input partition.
MaskImage perturb_masks(const MaskImage& gt, const PerturbOptions& options, std::uint64_t seed);

/// Seed for frame `index` derived from the scene seed.
std::uint64_t frame_seed(std::uint64_t scene_seed, std::size_t index);

/// Writes a complete scene directory (intrinsic.txt, depth/, pose/, masks/)
/// plus gt.ply and scene_spec.json.
void write_synthetic_scene(const SceneSpec& spec, const std::filesystem::path& out_dir,
                           unsigned threads = 1);

/// Ground-truth cloud: all frames lifted with instance IDs, grid pooled.
LabeledCloud ground_truth_cloud(const SceneSpec& spec, unsigned threads = 1);

}  // namespace masklift
