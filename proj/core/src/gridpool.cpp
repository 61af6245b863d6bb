#include "masklift/gridpool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <unordered_map>

#include "masklift/error.hpp"

namespace masklift {

void PoolConfig::validate() const {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw Error(ErrorCode::kConfig, "voxel size must be positive");
  }
}

VoxelKey voxel_key(const Point3& p, double voxel_size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

namespace {

// The centroid of points inside a voxel lies inside it in exact arithmetic;
// rounding can push a coordinate onto the upper face. Nudge it back so that
// pooling stays idempotent.
double clamp_into_cell(double value, std::int64_t cell, double voxel_size) {
  for (int guard = 0; guard < 4; ++guard) {
    const auto k = static_cast<std::int64_t>(std::floor(value / voxel_size));
    if (k == cell) break;
    value = std::nextafter(value, k > cell ? -INFINITY : INFINITY);
  }
  return value;
}

Label majority_label(std::span<const std::size_t> members, const std::vector<Label>& labels) {
  std::unordered_map<Label, std::size_t> votes;
  for (std::size_t idx : members) {
    if (labels[idx] != kUnlabeled) ++votes[labels[idx]];
  }
  Label best = kUnlabeled;
  std::size_t best_count = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_count || (count == best_count && label < best)) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

LabeledCloud grid_pool(const LabeledCloud& cloud, const PoolConfig& cfg) {
  cfg.validate();
  cloud.validate();

  const std::size_t n = cloud.size();
  std::vector<VoxelKey> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = voxel_key(cloud.points[i], cfg.voxel_size);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
  });

  LabeledCloud out;
  std::size_t begin = 0;
  while (begin < n) {
    std::size_t end = begin + 1;
    while (end < n && keys[order[end]] == keys[order[begin]]) ++end;
    const std::span<const std::size_t> members(order.data() + begin, end - begin);

    Point3 sum = Point3::Zero();
    for (std::size_t idx : members) sum += cloud.points[idx];
    Point3 centroid = sum / static_cast<double>(members.size());
    const VoxelKey& key = keys[order[begin]];
    centroid.x() = clamp_into_cell(centroid.x(), key.ix, cfg.voxel_size);
    centroid.y() = clamp_into_cell(centroid.y(), key.iy, cfg.voxel_size);
    centroid.z() = clamp_into_cell(centroid.z(), key.iz, cfg.voxel_size);

    out.push_back(centroid, majority_label(members, cloud.labels));
    begin = end;
  }
  return out;
}

}  // namespace masklift
