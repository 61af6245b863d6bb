#include "masklift/spatial_hash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "masklift/error.hpp"

namespace masklift {

SpatialHashGrid::SpatialHashGrid(std::span<const Point3> points, double cell_size)
    : points_(points), cell_size_(cell_size) {
  if (!(cell_size > 0.0)) {
    throw Error(ErrorCode::kConfig, "hash grid cell size must be positive");
  }
  if (points.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kMalformedInput, "too many points for the hash grid");
  }
  std::vector<Cell> cell(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) cell[i] = cell_of(points[i]);

  sorted_.resize(points.size());
  std::iota(sorted_.begin(), sorted_.end(), 0U);
  std::sort(sorted_.begin(), sorted_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::tie(cell[a].x, cell[a].y, cell[a].z, a) <
           std::tie(cell[b].x, cell[b].y, cell[b].z, b);
  });

  cells_.reserve(points.size());
  std::uint32_t begin = 0;
  const auto n = static_cast<std::uint32_t>(sorted_.size());
  while (begin < n) {
    std::uint32_t end = begin + 1;
    while (end < n && cell[sorted_[end]] == cell[sorted_[begin]]) ++end;
    cells_.emplace(cell[sorted_[begin]], Range{begin, end});
    begin = end;
  }
}

SpatialHashGrid::Cell SpatialHashGrid::cell_of(const Point3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.y() / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.z() / cell_size_))};
}

std::optional<std::size_t> SpatialHashGrid::nearest_within(const Point3& q,
                                                           double radius) const {
  const double r2 = radius * radius;
  const Cell c = cell_of(q);
  std::optional<std::size_t> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
        if (it == cells_.end()) continue;
        for (std::uint32_t k = it->second.begin; k < it->second.end; ++k) {
          const std::uint32_t j = sorted_[k];
          const double d2 = (points_[j] - q).squaredNorm();
          if (d2 > r2) continue;
          if (d2 < best_d2 || (d2 == best_d2 && j < *best)) {
            best = j;
            best_d2 = d2;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace masklift
