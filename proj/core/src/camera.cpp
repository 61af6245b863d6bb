#include "masklift/camera.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "masklift/error.hpp"

namespace masklift {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
      !std::isfinite(cx) || !std::isfinite(cy)) {
    throw Error(ErrorCode::kConfig, "intrinsics require finite fx > 0 and fy > 0");
  }
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraIntrinsics::inverse_matrix() const {
  Eigen::Matrix3d k_inv;
  k_inv << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k_inv;
}

CameraIntrinsics CameraIntrinsics::from_matrix(const Eigen::Matrix4d& k) {
  CameraIntrinsics intr{k(0, 0), k(1, 1), k(0, 2), k(1, 2)};
  intr.validate();
  return intr;
}

bool CameraPose::is_valid(double tolerance) const noexcept {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if (((gram - Eigen::Matrix3d::Identity()).cwiseAbs().array() > tolerance).any()) {
    return false;
  }
  return std::abs(rotation.determinant() - 1.0) <= tolerance;
}

void CameraPose::validate(double tolerance) const {
  if (!is_valid(tolerance)) {
    throw Error(ErrorCode::kInvalidPose, "pose rotation is not orthonormal with det = +1");
  }
}

Point3 CameraPose::center() const { return -(rotation.transpose() * translation); }

Eigen::Matrix4d CameraPose::world_from_camera() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation.transpose();
  m.topRightCorner<3, 1>() = center();
  return m;
}

CameraPose CameraPose::from_world_from_camera(const Eigen::Matrix4d& m) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidPose, "pose matrix has non-finite entries");
  }
  CameraPose pose;
  const Eigen::Matrix3d r_wc = m.topLeftCorner<3, 3>();
  pose.rotation = r_wc.transpose();
  pose.translation = -(pose.rotation * m.topRightCorner<3, 1>());
  pose.validate();
  return pose;
}

void DepthFrame::validate() const {
  if (width < 0 || height < 0 ||
      depth.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kMalformedFrame,
                "depth buffer holds " + std::to_string(depth.size()) + " values, expected " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  if (!(depth_divisor > 0.0)) {
    throw Error(ErrorCode::kMalformedFrame, "depth divisor must be positive");
  }
}

Point3 unproject_pixel(PixelCoord pix, double depth_m, const CameraIntrinsics& intr,
                       const CameraPose& pose) {
  if (!(depth_m > 0.0) || !std::isfinite(depth_m)) {
    throw Error(ErrorCode::kInvalidDepth, "depth must be positive and finite");
  }
  pose.validate();
  const Eigen::Vector3d cam = intr.inverse_matrix() * (depth_m * Eigen::Vector3d(pix.u, pix.v, 1.0));
  const Eigen::Matrix3d r_inv = pose.rotation.transpose();
  return r_inv * cam - r_inv * pose.translation;
}

std::vector<UnprojectedPixel> unproject_frame(const DepthFrame& frame,
                                              const CameraIntrinsics& intr,
                                              const CameraPose& pose,
                                              const FrameSampling& sampling) {
  frame.validate();
  intr.validate();
  pose.validate();
  if (sampling.stride < 1) {
    throw Error(ErrorCode::kConfig, "stride must be >= 1");
  }

  // world = R^T * K^-1 * (d [u v 1]) - R^T t, with K^-1 expanded per axis.
  const Eigen::Matrix3d r_inv = pose.rotation.transpose();
  const Eigen::Vector3d offset = -(r_inv * pose.translation);
  const double inv_fx = 1.0 / intr.fx;
  const double inv_fy = 1.0 / intr.fy;

  std::vector<UnprojectedPixel> out;
  for (int v = 0; v < frame.height; v += sampling.stride) {
    const double y_n = (static_cast<double>(v) - intr.cy) * inv_fy;
    for (int u = 0; u < frame.width; u += sampling.stride) {
      const auto d = metric_depth(frame.at(u, v), frame.depth_divisor, sampling.max_depth);
      if (!d) continue;
      const double x_n = (static_cast<double>(u) - intr.cx) * inv_fx;
      const Eigen::Vector3d cam(x_n * *d, y_n * *d, *d);
      out.push_back({u, v, r_inv * cam + offset});
    }
  }
  return out;
}

std::optional<Projection> project_point(const Point3& p, const CameraIntrinsics& intr,
                                        const CameraPose& pose) {
  const Eigen::Vector3d cam = pose.rotation * p + pose.translation;
  if (!(cam.z() > 0.0)) return std::nullopt;
  Projection proj;
  proj.pixel.u = intr.fx * cam.x() / cam.z() + intr.cx;
  proj.pixel.v = intr.fy * cam.y() / cam.z() + intr.cy;
  proj.depth = cam.z();
  return proj;
}

}  // namespace masklift
