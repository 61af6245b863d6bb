#pragma once

#include <compare>
#include <cstdint>

#include "masklift/cloud.hpp"

namespace masklift {

struct PoolConfig {
  double voxel_size = 0.05;
  void validate() const;
};

struct VoxelKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::int64_t iz = 0;

  auto operator<=>(const VoxelKey&) const = default;
};

/// floor(coord / voxel_size) per axis, voxel origin at the world origin.
VoxelKey voxel_key(const Point3& p, double voxel_size);

/// One point per occupied voxel, ordered by VoxelKey. Position is the voxel
/// centroid; label is the majority nonzero label (ties to the smaller ID), or
/// 0 when every member is unlabeled.
LabeledCloud grid_pool(const LabeledCloud& cloud, const PoolConfig& cfg);

}  // namespace masklift
