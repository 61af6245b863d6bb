#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "masklift/cloud.hpp"
#include "masklift/merge.hpp"

namespace masklift {

struct NormalCloud {
  std::vector<Point3> points;
  std::vector<Eigen::Vector3d> normals;
};

struct GraphEdge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  double weight = 0.0;
};

/// Undirected weighted graph; each edge stored once with a < b.
struct SegGraph {
  std::size_t node_count = 0;
  std::vector<GraphEdge> edges;
};

struct OversegConfig {
  std::size_t knn = 16;
  double fz_k = 0.1;
  std::size_t min_segment = 20;

  void validate() const;
};

/// Per-point segment IDs, contiguous from 1.
struct Oversegmentation {
  std::vector<std::uint32_t> segment_id;

  std::size_t segment_count() const;
};

/// PCA normals over the k nearest neighbors (self included). Each normal is
/// flipped so that its largest-magnitude component is positive.
NormalCloud estimate_normals(std::span<const Point3> points, std::size_t k,
                             unsigned threads = 1);

/// Connects every point to its knn nearest other points with weight
/// 1 - |n_i . n_j|. Edges are deduplicated and sorted by (a, b).
SegGraph build_graph(const NormalCloud& nc, std::size_t knn, unsigned threads = 1);

/// Efficient graph-based segmentation: merge across an edge when its weight is
/// <= min(Int(C1) + k/|C1|, Int(C2) + k/|C2|), then absorb components smaller
/// than min_segment along the cheapest edges.
Oversegmentation felzenszwalb_segment(const SegGraph& g, const OversegConfig& cfg);

/// Normals, graph and segmentation in one call.
Oversegmentation oversegment(std::span<const Point3> points, const OversegConfig& cfg,
                             unsigned threads = 1);

/// Unifies scene masks with over-segments through the bidirectional criterion
/// on an identity correspondence. Every point takes the class of its segment,
/// so label boundaries follow segment boundaries.
LabeledCloud ensemble(const LabeledCloud& scene, const Oversegmentation& overseg,
                      const MergeConfig& cfg);

}  // namespace masklift
