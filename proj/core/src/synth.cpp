#include "masklift/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>

#include <Eigen/Geometry>
#include <json.hpp>

#include "masklift/dataset.hpp"
#include "masklift/error.hpp"
#include "masklift/gridpool.hpp"
#include "masklift/parallel.hpp"
#include "masklift/ply.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace masklift {

namespace {

constexpr double kRayEpsilon = 1e-9;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kValidation, path + ": " + what);
}

Label primitive_id(const Primitive& p) {
  return std::visit([](const auto& prim) { return prim.id; }, p);
}

std::optional<double> intersect(const BoxPrimitive& box, const Eigen::Vector3d& o,
                                const Eigen::Vector3d& d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < kRayEpsilon) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[a] - o[a]) / d[a];
    double t1 = (box.max[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_far <= kRayEpsilon) return std::nullopt;
  return t_near > kRayEpsilon ? t_near : t_far;
}

std::optional<double> intersect(const PlanePrimitive& plane, const Eigen::Vector3d& o,
                                const Eigen::Vector3d& d) {
  const Eigen::Vector3d n = plane.edge_u.cross(plane.edge_v);
  const double denom = n.dot(d);
  if (std::abs(denom) < kRayEpsilon) return std::nullopt;
  const double t = n.dot(plane.origin - o) / denom;
  if (t <= kRayEpsilon) return std::nullopt;
  const Eigen::Vector3d w = o + t * d - plane.origin;
  const double uu = plane.edge_u.dot(plane.edge_u);
  const double vv = plane.edge_v.dot(plane.edge_v);
  const double uv = plane.edge_u.dot(plane.edge_v);
  const double wu = w.dot(plane.edge_u);
  const double wv = w.dot(plane.edge_v);
  const double det = uu * vv - uv * uv;
  const double s = (wu * vv - wv * uv) / det;
  const double r = (wv * uu - wu * uv) / det;
  if (s < 0.0 || s > 1.0 || r < 0.0 || r > 1.0) return std::nullopt;
  return t;
}

double surface_distance(const BoxPrimitive& box, const Point3& p) {
  const Eigen::Vector3d outside =
      (box.min - p).cwiseMax(p - box.max).cwiseMax(Eigen::Vector3d::Zero());
  if (outside.squaredNorm() > 0.0) return outside.norm();
  return std::min((p - box.min).minCoeff(), (box.max - p).minCoeff());
}

// Exact for rectangles (orthogonal edges).
double surface_distance(const PlanePrimitive& plane, const Point3& p) {
  const Eigen::Vector3d w = p - plane.origin;
  const double s = std::clamp(w.dot(plane.edge_u) / plane.edge_u.squaredNorm(), 0.0, 1.0);
  const double r = std::clamp(w.dot(plane.edge_v) / plane.edge_v.squaredNorm(), 0.0, 1.0);
  return (plane.origin + s * plane.edge_u + r * plane.edge_v - p).norm();
}

Eigen::Vector3d read_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) invalid(path, "expected an array of 3 numbers");
  Eigen::Vector3d v;
  for (int k = 0; k < 3; ++k) {
    if (!j[k].is_number()) invalid(path + "[" + std::to_string(k) + "]", "expected a number");
    v[k] = j[k].get<double>();
  }
  return v;
}

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename T>
T read_number(const json& obj, const char* key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number()) invalid(path + "." + key, "expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) invalid(path + "." + key, "expected an integer");
  }
  return v.get<T>();
}

// Uniform double in [0, 1) from the top 53 bits.
double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

}  // namespace

void SceneSpec::validate() const {
  if (primitives.empty()) invalid("primitives", "at least one primitive is required");
  std::set<Label> ids;
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const std::string path = "primitives[" + std::to_string(i) + "]";
    const Label id = primitive_id(primitives[i]);
    if (id == 0) invalid(path + ".id", "instance ids must be >= 1");
    if (!ids.insert(id).second) invalid(path + ".id", "duplicate instance id");
    if (const auto* box = std::get_if<BoxPrimitive>(&primitives[i])) {
      if (!((box->max - box->min).array() > 0.0).all()) invalid(path, "box max must exceed min");
    } else {
      const auto& plane = std::get<PlanePrimitive>(primitives[i]);
      if (plane.edge_u.cross(plane.edge_v).norm() <= 0.0) invalid(path, "degenerate plane edges");
    }
  }
  if (poses.empty()) invalid("trajectory", "at least one pose is required");
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (!poses[i].is_valid()) invalid("trajectory.poses[" + std::to_string(i) + "]", "invalid pose");
  }
  if (width < 1 || height < 1) invalid("image", "width and height must be >= 1");
  if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) invalid("intrinsics", "fx, fy must be > 0");
  if (!(depth_divisor > 0.0)) invalid("depth_divisor", "must be > 0");
  if (!(perturb.split_probability >= 0.0 && perturb.split_probability <= 1.0)) {
    invalid("perturb.split_probability", "must lie in [0, 1]");
  }
  if (!(gt_voxel > 0.0)) invalid("gt_voxel", "must be > 0");
}

CameraPose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
  if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d world_from_cam;
  world_from_cam.col(0) = right;
  world_from_cam.col(1) = down;
  world_from_cam.col(2) = forward;
  CameraPose pose;
  pose.rotation = world_from_cam.transpose();
  pose.translation = -(pose.rotation * eye);
  return pose;
}

std::vector<CameraPose> orbit_poses(const Eigen::Vector3d& center, double radius, double height,
                                    std::size_t count, const Eigen::Vector3d& target) {
  std::vector<CameraPose> poses;
  poses.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double angle = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(count);
    const Eigen::Vector3d eye =
        center + Eigen::Vector3d(radius * std::cos(angle), radius * std::sin(angle), height);
    poses.push_back(look_at(eye, target));
  }
  return poses;
}

SceneSpec default_scene_spec() {
  SceneSpec spec;
  const double xs[4] = {-1.5, -0.5, 0.5, 1.5};
  const double ys[2] = {-0.6, 0.6};
  const double half_w[8] = {0.20, 0.25, 0.18, 0.22, 0.24, 0.20, 0.25, 0.19};
  const double heights[8] = {0.40, 0.70, 0.30, 0.55, 0.45, 0.65, 0.35, 0.60};
  Label id = 1;
  for (int row = 0; row < 2; ++row) {
    for (int col = 0; col < 4; ++col) {
      const int k = row * 4 + col;
      BoxPrimitive box;
      box.id = id++;
      box.min = {xs[col] - half_w[k], ys[row] - half_w[k], 0.0};
      box.max = {xs[col] + half_w[k], ys[row] + half_w[k], heights[k]};
      spec.primitives.push_back(box);
    }
  }
  spec.poses = orbit_poses({0.0, 0.0, 0.0}, 3.2, 2.0, 16, {0.0, 0.0, 0.25});
  spec.seed = 7;
  return spec;
}

SceneSpec parse_scene_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("scene spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) invalid("$", "expected an object");

  SceneSpec spec;
  spec.primitives.clear();
  spec.poses.clear();
  if (doc.contains("image")) {
    const auto& img = doc["image"];
    if (!img.is_object()) invalid("image", "expected an object");
    spec.width = read_number<int>(img, "width", "image", spec.width);
    spec.height = read_number<int>(img, "height", "image", spec.height);
  }
  if (doc.contains("intrinsics")) {
    const auto& k = doc["intrinsics"];
    if (!k.is_object()) invalid("intrinsics", "expected an object");
    spec.intrinsics.fx = read_number<double>(k, "fx", "intrinsics", spec.intrinsics.fx);
    spec.intrinsics.fy = read_number<double>(k, "fy", "intrinsics", spec.intrinsics.fy);
    spec.intrinsics.cx = read_number<double>(k, "cx", "intrinsics", spec.intrinsics.cx);
    spec.intrinsics.cy = read_number<double>(k, "cy", "intrinsics", spec.intrinsics.cy);
  }
  spec.depth_divisor = read_number<double>(doc, "depth_divisor", "$", spec.depth_divisor);
  spec.seed = read_number<std::uint64_t>(doc, "seed", "$", spec.seed);
  spec.gt_voxel = read_number<double>(doc, "gt_voxel", "$", spec.gt_voxel);
  if (doc.contains("perturb")) {
    const auto& p = doc["perturb"];
    if (!p.is_object()) invalid("perturb", "expected an object");
    spec.perturb.split_probability =
        read_number<double>(p, "split_probability", "perturb", 0.0);
    if (p.contains("permute_ids")) {
      if (!p["permute_ids"].is_boolean()) invalid("perturb.permute_ids", "expected a boolean");
      spec.perturb.permute_ids = p["permute_ids"].get<bool>();
    }
  }

  if (!doc.contains("primitives") || !doc["primitives"].is_array()) {
    invalid("primitives", "expected an array");
  }
  const auto& prims = doc["primitives"];
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const std::string path = "primitives[" + std::to_string(i) + "]";
    const auto& p = prims[i];
    if (!p.is_object()) invalid(path, "expected an object");
    if (!p.contains("id") || !p["id"].is_number_integer() || p["id"].get<long long>() < 1) {
      invalid(path + ".id", "expected an integer >= 1");
    }
    const auto id = static_cast<Label>(p["id"].get<long long>());
    const std::string type = p.value("type", "");
    if (type == "box") {
      BoxPrimitive box;
      box.id = id;
      if (!p.contains("min")) invalid(path + ".min", "missing");
      if (!p.contains("max")) invalid(path + ".max", "missing");
      box.min = read_vec3(p["min"], path + ".min");
      box.max = read_vec3(p["max"], path + ".max");
      spec.primitives.push_back(box);
    } else if (type == "plane") {
      PlanePrimitive plane;
      plane.id = id;
      for (const char* key : {"origin", "edge_u", "edge_v"}) {
        if (!p.contains(key)) invalid(path + "." + key, "missing");
      }
      plane.origin = read_vec3(p["origin"], path + ".origin");
      plane.edge_u = read_vec3(p["edge_u"], path + ".edge_u");
      plane.edge_v = read_vec3(p["edge_v"], path + ".edge_v");
      spec.primitives.push_back(plane);
    } else {
      invalid(path + ".type", "expected \"box\" or \"plane\"");
    }
  }

  if (!doc.contains("trajectory") || !doc["trajectory"].is_object()) {
    invalid("trajectory", "expected an object");
  }
  const auto& traj = doc["trajectory"];
  if (traj.contains("orbit")) {
    const auto& o = traj["orbit"];
    if (!o.is_object()) invalid("trajectory.orbit", "expected an object");
    const Eigen::Vector3d center =
        o.contains("center") ? read_vec3(o["center"], "trajectory.orbit.center")
                             : Eigen::Vector3d::Zero();
    const Eigen::Vector3d target =
        o.contains("target") ? read_vec3(o["target"], "trajectory.orbit.target") : center;
    const double radius = read_number<double>(o, "radius", "trajectory.orbit", 3.0);
    const double height = read_number<double>(o, "height", "trajectory.orbit", 1.5);
    const int count = read_number<int>(o, "count", "trajectory.orbit", 16);
    if (!(radius > 0.0)) invalid("trajectory.orbit.radius", "must be > 0");
    if (count < 1) invalid("trajectory.orbit.count", "must be >= 1");
    spec.poses = orbit_poses(center, radius, height, static_cast<std::size_t>(count), target);
  } else if (traj.contains("poses")) {
    const auto& list = traj["poses"];
    if (!list.is_array()) invalid("trajectory.poses", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "trajectory.poses[" + std::to_string(i) + "]";
      if (!list[i].is_array() || list[i].size() != 16) {
        invalid(path, "expected 16 numbers (world-from-camera, row-major)");
      }
      Eigen::Matrix4d m;
      for (int k = 0; k < 16; ++k) {
        if (!list[i][k].is_number()) invalid(path, "expected numbers");
        m(k / 4, k % 4) = list[i][k].get<double>();
      }
      try {
        spec.poses.push_back(CameraPose::from_world_from_camera(m));
      } catch (const Error&) {
        invalid(path, "rotation block is not a rotation");
      }
    }
  } else {
    invalid("trajectory", "expected \"orbit\" or \"poses\"");
  }

  spec.validate();
  return spec;
}

std::string scene_spec_to_json(const SceneSpec& spec) {
  json doc;
  doc["image"] = {{"width", spec.width}, {"height", spec.height}};
  doc["intrinsics"] = {{"fx", spec.intrinsics.fx},
                       {"fy", spec.intrinsics.fy},
                       {"cx", spec.intrinsics.cx},
                       {"cy", spec.intrinsics.cy}};
  doc["depth_divisor"] = spec.depth_divisor;
  doc["seed"] = spec.seed;
  doc["gt_voxel"] = spec.gt_voxel;
  doc["perturb"] = {{"split_probability", spec.perturb.split_probability},
                    {"permute_ids", spec.perturb.permute_ids}};
  auto& prims = doc["primitives"] = json::array();
  for (const auto& p : spec.primitives) {
    if (const auto* box = std::get_if<BoxPrimitive>(&p)) {
      prims.push_back({{"type", "box"},
                       {"id", box->id},
                       {"min", vec3_json(box->min)},
                       {"max", vec3_json(box->max)}});
    } else {
      const auto& plane = std::get<PlanePrimitive>(p);
      prims.push_back({{"type", "plane"},
                       {"id", plane.id},
                       {"origin", vec3_json(plane.origin)},
                       {"edge_u", vec3_json(plane.edge_u)},
                       {"edge_v", vec3_json(plane.edge_v)}});
    }
  }
  auto& poses = doc["trajectory"]["poses"] = json::array();
  for (const auto& pose : spec.poses) {
    const Eigen::Matrix4d m = pose.world_from_camera();
    json row = json::array();
    for (int k = 0; k < 16; ++k) row.push_back(m(k / 4, k % 4));
    poses.push_back(row);
  }
  return doc.dump(2) + "\n";
}

std::optional<std::pair<double, Label>> cast_ray(const std::vector<Primitive>& primitives,
                                                 const Eigen::Vector3d& origin,
                                                 const Eigen::Vector3d& dir) {
  std::optional<std::pair<double, Label>> best;
  for (const auto& p : primitives) {
    const auto t = std::visit([&](const auto& prim) { return intersect(prim, origin, dir); }, p);
    if (t && (!best || *t < best->first)) best = std::make_pair(*t, primitive_id(p));
  }
  return best;
}

std::pair<Label, double> nearest_instance(const std::vector<Primitive>& primitives,
                                          const Point3& p) {
  std::pair<Label, double> best{kUnlabeled, std::numeric_limits<double>::infinity()};
  for (const auto& prim : primitives) {
    const double d = std::visit([&](const auto& x) { return surface_distance(x, p); }, prim);
    if (d < best.second) best = {primitive_id(prim), d};
  }
  return best;
}

RenderedFrame render_depth(const SceneSpec& spec, std::size_t pose_index, unsigned threads) {
  if (pose_index >= spec.poses.size()) {
    throw Error(ErrorCode::kValidation, "pose index " + std::to_string(pose_index) +
                                            " out of range");
  }
  const CameraPose& pose = spec.poses[pose_index];
  const Eigen::Matrix3d world_from_cam = pose.rotation.transpose();
  const Eigen::Vector3d origin = pose.center();
  const Eigen::Matrix3d k_inv = spec.intrinsics.inverse_matrix();

  const std::size_t n = static_cast<std::size_t>(spec.width) * spec.height;
  RenderedFrame out;
  out.depth.width = spec.width;
  out.depth.height = spec.height;
  out.depth.depth_divisor = spec.depth_divisor;
  out.depth.depth.assign(n, 0);
  std::vector<Label> instance(n, kUnlabeled);

  parallel_for(static_cast<std::size_t>(spec.height), threads, [&](std::size_t v) {
    for (int u = 0; u < spec.width; ++u) {
      // Camera-space direction with unit z, so the hit parameter is camera depth.
      const Eigen::Vector3d dir_cam = k_inv * Eigen::Vector3d(u, static_cast<double>(v), 1.0);
      const auto hit = cast_ray(spec.primitives, origin, world_from_cam * dir_cam);
      if (!hit) continue;
      const double raw = std::floor(hit->first * spec.depth_divisor);
      if (raw < 1.0 || raw > 65535.0) continue;
      const std::size_t idx = v * static_cast<std::size_t>(spec.width) + u;
      out.depth.depth[idx] = static_cast<std::uint16_t>(raw);
      instance[idx] = hit->second;
    }
  });

  std::set<Label> present(instance.begin(), instance.end());
  present.erase(kUnlabeled);
  std::map<Label, LocalId> local_of;
  for (Label id : present) {
    const auto local = static_cast<LocalId>(local_of.size() + 1);
    local_of[id] = local;
    out.instance_of[local] = id;
    out.gt_mask.confidences[local] = 1.0;
  }
  out.gt_mask.width = spec.width;
  out.gt_mask.height = spec.height;
  out.gt_mask.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.gt_mask.labels[i] = instance[i] == kUnlabeled ? 0 : local_of[instance[i]];
  }
  return out;
}

std::uint64_t frame_seed(std::uint64_t scene_seed, std::size_t index) {
  std::uint64_t z = scene_seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MaskImage perturb_masks(const MaskImage& gt, const PerturbOptions& options, std::uint64_t seed) {
  gt.validate();
  if (!(options.split_probability >= 0.0 && options.split_probability <= 1.0)) {
    throw Error(ErrorCode::kValidation, "split probability must lie in [0, 1]");
  }
  if (options.split_probability == 0.0 && !options.permute_ids) return gt;

  std::mt19937_64 rng(seed);
  struct Extent {
    int min_u = std::numeric_limits<int>::max(), max_u = -1;
    int min_v = std::numeric_limits<int>::max(), max_v = -1;
  };
  std::map<LocalId, Extent> extent;
  for (int v = 0; v < gt.height; ++v) {
    for (int u = 0; u < gt.width; ++u) {
      const LocalId id = gt.at(u, v);
      if (id == 0) continue;
      auto& e = extent[id];
      e.min_u = std::min(e.min_u, u);
      e.max_u = std::max(e.max_u, u);
      e.min_v = std::min(e.min_v, v);
      e.max_v = std::max(e.max_v, v);
    }
  }

  // For each source mask: split axis (0 = columns, 1 = rows, -1 = none),
  // cut coordinate, and the new IDs of its (one or two) parts.
  struct Split {
    int axis = -1;
    int cut = 0;
    LocalId low = 0;
    LocalId high = 0;
  };
  std::map<LocalId, Split> plan;
  std::map<LocalId, double> new_conf;
  LocalId next = 1;
  for (const auto& [id, conf] : gt.confidences) {
    Split s;
    const auto it = extent.find(id);
    if (it != extent.end() && unit_real(rng) < options.split_probability) {
      const Extent& e = it->second;
      std::vector<int> axes;
      if (e.max_u > e.min_u) axes.push_back(0);
      if (e.max_v > e.min_v) axes.push_back(1);
      if (!axes.empty()) {
        s.axis = axes[uniform_below(rng, axes.size())];
        const int lo = s.axis == 0 ? e.min_u : e.min_v;
        const int hi = s.axis == 0 ? e.max_u : e.max_v;
        // Parts are coord < cut and coord >= cut; both nonempty.
        s.cut = lo + 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo)));
      }
    }
    s.low = next++;
    new_conf[s.low] = conf;
    if (s.axis >= 0) {
      s.high = next++;
      new_conf[s.high] = conf;
    }
    plan[id] = s;
  }

  std::vector<LocalId> permutation(next);
  for (LocalId i = 0; i < next; ++i) permutation[i] = i;
  if (options.permute_ids) {
    for (std::size_t i = permutation.size() - 1; i > 1; --i) {
      const auto j = 1 + uniform_below(rng, i);  // index 0 stays fixed
      std::swap(permutation[i], permutation[j]);
    }
  }

  MaskImage out;
  out.width = gt.width;
  out.height = gt.height;
  out.labels.resize(gt.labels.size());
  for (int v = 0; v < gt.height; ++v) {
    for (int u = 0; u < gt.width; ++u) {
      const std::size_t idx = static_cast<std::size_t>(v) * gt.width + u;
      const LocalId id = gt.labels[idx];
      if (id == 0) {
        out.labels[idx] = 0;
        continue;
      }
      const Split& s = plan.at(id);
      LocalId part = s.low;
      if (s.axis >= 0 && (s.axis == 0 ? u : v) >= s.cut) part = s.high;
      out.labels[idx] = permutation[part];
    }
  }
  for (const auto& [id, conf] : new_conf) out.confidences[permutation[id]] = conf;
  return out;
}

LabeledCloud ground_truth_cloud(const SceneSpec& spec, unsigned threads) {
  spec.validate();
  std::vector<LabeledCloud> frames(spec.poses.size());
  parallel_for(spec.poses.size(), threads, [&](std::size_t i) {
    const auto frame = render_depth(spec, i);
    for (const auto& px : unproject_frame(frame.depth, spec.intrinsics, spec.poses[i])) {
      frames[i].push_back(px.point, frame.instance_of.at(frame.gt_mask.at(px.u, px.v)));
    }
  });
  LabeledCloud all;
  for (const auto& f : frames) all.append(f);
  auto pooled = grid_pool(all, PoolConfig{spec.gt_voxel});
  round_to_float(pooled);
  return pooled;
}

void write_synthetic_scene(const SceneSpec& spec, const fs::path& out_dir, unsigned threads) {
  spec.validate();
  std::error_code ec;
  for (const char* sub : {"depth", "pose", "masks"}) {
    fs::create_directories(out_dir / sub, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + (out_dir / sub).string());
  }

  Eigen::Matrix4d k = Eigen::Matrix4d::Identity();
  k.topLeftCorner<3, 3>() = spec.intrinsics.matrix();
  write_matrix4(k, out_dir / "intrinsic.txt");

  parallel_for(spec.poses.size(), threads, [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu", i);
    const auto frame = render_depth(spec, i);
    write_depth_png(frame.depth, out_dir / "depth" / (std::string(name) + ".png"));
    write_matrix4(spec.poses[i].world_from_camera(),
                  out_dir / "pose" / (std::string(name) + ".txt"));
    const auto mask = perturb_masks(frame.gt_mask, spec.perturb, frame_seed(spec.seed, i));
    write_label_mask(mask, out_dir / "masks" / (std::string(name) + ".png"),
                     out_dir / "masks" / (std::string(name) + ".json"));
  });

  write_ply(ground_truth_cloud(spec, threads), out_dir / "gt.ply");
  write_text_file(out_dir / "scene_spec.json", scene_spec_to_json(spec));
}

}  // namespace masklift
