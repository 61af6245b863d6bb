#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace masklift {

using Point3 = Eigen::Vector3d;

/// Pinhole intrinsics. No distortion model.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws kConfig unless fx > 0 and fy > 0.
  void validate() const;
  Eigen::Matrix3d matrix() const;
  /// Closed-form inverse of matrix().
  Eigen::Matrix3d inverse_matrix() const;

  /// Reads fx, fy, cx, cy out of a 4x4 (or 3x3 upper-left) calibration matrix.
  static CameraIntrinsics from_matrix(const Eigen::Matrix4d& k);
};

/// Camera-from-world rigid transform: x_cam = rotation * x_world + translation.
///
/// Pose files on disk hold the world-from-camera matrix; use
/// from_world_from_camera() to convert.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Throws kInvalidPose when the rotation is not orthonormal with det +1.
  void validate(double tolerance = 1e-6) const;
  bool is_valid(double tolerance = 1e-6) const noexcept;

  /// Camera center in world coordinates.
  Point3 center() const;
  Eigen::Matrix4d world_from_camera() const;

  static CameraPose from_world_from_camera(const Eigen::Matrix4d& m);
};

struct PixelCoord {
  double u = 0.0;  // column
  double v = 0.0;  // row
};

/// Raw sensor depth, row-major. Raw value 0 marks a missing measurement.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> depth;
  double depth_divisor = 1000.0;

  std::uint16_t at(int u, int v) const {
    return depth[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(u)];
  }
  /// Throws kMalformedFrame on a size mismatch or non-positive divisor.
  void validate() const;
};

struct FrameSampling {
  int stride = 1;
  /// Depths beyond this many meters are treated as invalid.
  double max_depth = 10.0;
};

struct UnprojectedPixel {
  int u = 0;
  int v = 0;
  Point3 point;
};

/// Back-projects one pixel at metric depth into world space.
Point3 unproject_pixel(PixelCoord pix, double depth_m, const CameraIntrinsics& intr,
                       const CameraPose& pose);

/// Back-projects every valid pixel on the stride lattice, row-major.
std::vector<UnprojectedPixel> unproject_frame(const DepthFrame& frame,
                                              const CameraIntrinsics& intr,
                                              const CameraPose& pose,
                                              const FrameSampling& sampling = {});

struct Projection {
  PixelCoord pixel;
  double depth = 0.0;
};

/// Forward model. Returns nullopt for points at or behind the image plane.
std::optional<Projection> project_point(const Point3& p, const CameraIntrinsics& intr,
                                        const CameraPose& pose);

/// Metric depth of a raw value, or nullopt when the value is invalid under `max_depth`.
inline std::optional<double> metric_depth(std::uint16_t raw, double divisor,
                                          double max_depth) {
  if (raw == 0) return std::nullopt;
  const double d = static_cast<double>(raw) / divisor;
  if (d > max_depth) return std::nullopt;
  return d;
}

}  // namespace masklift
