#include "masklift/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace masklift {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.sq_distance != b.sq_distance ? a.sq_distance < b.sq_distance : a.index < b.index;
}

}  // namespace

KdTree::KdTree(std::span<const Point3> points, std::size_t leaf_size)
    : points_(points), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  index_.resize(points.size());
  std::iota(index_.begin(), index_.end(), 0U);
  if (!index_.empty()) {
    nodes_.reserve(2 * points.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(index_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= leaf_size_) return id;

  Point3 lo = points_[index_[begin]];
  Point3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[index_[i]]);
    hi = hi.cwiseMax(points_[index_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis];
                     const double pb = points_[b][axis];
                     return pa != pb ? pa < pb : a < b;
                   });
  const double split = points_[index_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::int32_t node_id, const Point3& q, std::size_t k,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Neighbor cand{index_[i], (points_[index_[i]] - q).squaredNorm()};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, k, heap);
  // Points equal to the split value may sit on either side, hence <=.
  if (heap.size() < k || diff * diff <= heap.front().sq_distance) {
    search(far, q, k, heap);
  }
}

std::vector<Neighbor> KdTree::knn(const Point3& q, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0 || nodes_.empty()) return heap;
  heap.reserve(k + 1);
  search(0, q, k, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

}  // namespace masklift
