#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "masklift/camera.hpp"

namespace masklift {

struct Neighbor {
  std::uint32_t index = 0;
  double sq_distance = 0.0;
};

/// Static 3-d tree for exact k-nearest-neighbor queries. Neighbors are ordered
/// by (squared distance, index), which makes results independent of build
/// order and thread schedule.
class KdTree {
 public:
  explicit KdTree(std::span<const Point3> points, std::size_t leaf_size = 12);

  /// Up to k nearest points to q, nearest first.
  std::vector<Neighbor> knn(const Point3& q, std::size_t k) const;

  std::size_t size() const noexcept { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& q, std::size_t k,
              std::vector<Neighbor>& heap) const;

  std::span<const Point3> points_;
  std::size_t leaf_size_;
  std::vector<std::uint32_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace masklift
