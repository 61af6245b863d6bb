#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "masklift/camera.hpp"

namespace masklift {

/// Uniform hash grid over a fixed point set. Cell size equals the query
/// radius, so a radius query inspects the 27 cells around the query point.
class SpatialHashGrid {
 public:
  SpatialHashGrid(std::span<const Point3> points, double cell_size);

  /// Index of the nearest point within `radius` (ties to the smaller index).
  /// `radius` must not exceed the cell size.
  std::optional<std::size_t> nearest_within(const Point3& q, double radius) const;

  double cell_size() const noexcept { return cell_size_; }

 private:
  struct Cell {
    std::int64_t x, y, z;
    bool operator==(const Cell&) const = default;
  };
  struct CellHash {
    std::size_t operator()(const Cell& c) const noexcept {
      // Large odd multipliers, as in the classic Teschner et al. voxel hash.
      auto h = static_cast<std::uint64_t>(c.x) * 73856093ULL;
      h ^= static_cast<std::uint64_t>(c.y) * 19349663ULL;
      h ^= static_cast<std::uint64_t>(c.z) * 83492791ULL;
      return static_cast<std::size_t>(h);
    }
  };
  struct Range {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };

  Cell cell_of(const Point3& p) const;

  std::span<const Point3> points_;
  double cell_size_;
  std::vector<std::uint32_t> sorted_;
  std::unordered_map<Cell, Range, CellHash> cells_;
};

}  // namespace masklift
