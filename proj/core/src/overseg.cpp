#include "masklift/overseg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "masklift/error.hpp"
#include "masklift/kdtree.hpp"
#include "masklift/parallel.hpp"
#include "masklift/union_find.hpp"

namespace masklift {

void OversegConfig::validate() const {
  if (knn < 1) throw Error(ErrorCode::kConfig, "knn must be >= 1");
  if (!(fz_k > 0.0) || !std::isfinite(fz_k)) throw Error(ErrorCode::kConfig, "fz_k must be > 0");
  if (min_segment < 1) throw Error(ErrorCode::kConfig, "min_segment must be >= 1");
}

std::size_t Oversegmentation::segment_count() const {
  return segment_id.empty() ? 0 : *std::max_element(segment_id.begin(), segment_id.end());
}

namespace {

// Largest-magnitude component positive. Components within 1e-9 of the maximum
// count as tied and the first one decides, so analytic ties such as
// (1, -1, 0)/sqrt(2) resolve the same way regardless of rounding.
Eigen::Vector3d orient(Eigen::Vector3d n) {
  const double max_abs = n.cwiseAbs().maxCoeff();
  for (int c = 0; c < 3; ++c) {
    if (std::abs(n[c]) >= max_abs - 1e-9) {
      if (n[c] < 0.0) n = -n;
      break;
    }
  }
  return n;
}

}  // namespace

NormalCloud estimate_normals(std::span<const Point3> points, std::size_t k, unsigned threads) {
  if (k < 3) throw Error(ErrorCode::kConfig, "normal estimation needs k >= 3");
  if (points.size() < k) {
    throw Error(ErrorCode::kInsufficientPoints,
                "normal estimation needs at least " + std::to_string(k) + " points, got " +
                    std::to_string(points.size()));
  }
  NormalCloud nc;
  nc.points.assign(points.begin(), points.end());
  nc.normals.resize(points.size());

  const KdTree tree(nc.points);
  parallel_for(points.size(), threads, [&](std::size_t i) {
    const auto nbrs = tree.knn(nc.points[i], k);
    Point3 mean = Point3::Zero();
    for (const auto& nb : nbrs) mean += nc.points[nb.index];
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& nb : nbrs) {
      const Eigen::Vector3d d = nc.points[nb.index] - mean;
      cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());
    // Eigenvalues come back ascending.
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    nc.normals[i] = orient(solver.eigenvectors().col(0).normalized());
  });
  return nc;
}

SegGraph build_graph(const NormalCloud& nc, std::size_t knn, unsigned threads) {
  if (knn < 1) throw Error(ErrorCode::kConfig, "knn must be >= 1");
  if (nc.points.size() != nc.normals.size()) {
    throw Error(ErrorCode::kMalformedInput, "normal cloud has mismatched lengths");
  }
  const std::size_t n = nc.points.size();
  const KdTree tree(nc.points);
  std::vector<std::vector<std::uint32_t>> adjacency(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (const auto& nb : tree.knn(nc.points[i], knn + 1)) {
      if (nb.index != i && adjacency[i].size() < knn) adjacency[i].push_back(nb.index);
    }
  });

  SegGraph g;
  g.node_count = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j : adjacency[i]) {
      const auto a = static_cast<std::uint32_t>(std::min<std::size_t>(i, j));
      const auto b = static_cast<std::uint32_t>(std::max<std::size_t>(i, j));
      const double dot = std::abs(nc.normals[a].dot(nc.normals[b]));
      g.edges.push_back({a, b, std::max(0.0, 1.0 - dot)});
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const GraphEdge& x, const GraphEdge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end(),
                            [](const GraphEdge& x, const GraphEdge& y) {
                              return x.a == y.a && x.b == y.b;
                            }),
                g.edges.end());
  return g;
}

Oversegmentation felzenszwalb_segment(const SegGraph& g, const OversegConfig& cfg) {
  cfg.validate();
  for (const auto& e : g.edges) {
    if (e.a >= g.node_count || e.b >= g.node_count || e.a == e.b || !(e.weight >= 0.0) ||
        !std::isfinite(e.weight)) {
      throw Error(ErrorCode::kMalformedInput, "graph has an invalid edge");
    }
  }

  std::vector<GraphEdge> edges = g.edges;
  std::sort(edges.begin(), edges.end(), [](const GraphEdge& x, const GraphEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });

  DisjointSet sets(g.node_count);
  // threshold[root] = Int(C) + k / |C|; Int of a singleton is 0.
  std::vector<double> threshold(g.node_count, cfg.fz_k);
  for (const auto& e : edges) {
    std::size_t a = sets.find(e.a);
    std::size_t b = sets.find(e.b);
    if (a == b) continue;
    if (e.weight <= threshold[a] && e.weight <= threshold[b]) {
      const std::size_t root = sets.unite(a, b);
      // Edges arrive in ascending order, so this edge is the new maximum
      // internal weight of the merged component.
      threshold[root] = e.weight + cfg.fz_k / static_cast<double>(sets.set_size(root));
    }
  }

  for (const auto& e : edges) {
    const std::size_t a = sets.find(e.a);
    const std::size_t b = sets.find(e.b);
    if (a != b && (sets.set_size(a) < cfg.min_segment || sets.set_size(b) < cfg.min_segment)) {
      sets.unite(a, b);
    }
  }

  Oversegmentation out;
  out.segment_id.resize(g.node_count);
  std::unordered_map<std::size_t, std::uint32_t> relabel;
  for (std::size_t i = 0; i < g.node_count; ++i) {
    const auto [it, inserted] =
        relabel.try_emplace(sets.find(i), static_cast<std::uint32_t>(relabel.size() + 1));
    out.segment_id[i] = it->second;
  }
  return out;
}

Oversegmentation oversegment(std::span<const Point3> points, const OversegConfig& cfg,
                             unsigned threads) {
  cfg.validate();
  const std::size_t k = std::max<std::size_t>(3, cfg.knn);
  if (points.size() < k) {
    // Too few points for normals; every point becomes its own segment.
    Oversegmentation out;
    out.segment_id.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      out.segment_id[i] = static_cast<std::uint32_t>(i + 1);
    }
    return out;
  }
  const auto normals = estimate_normals(points, k, threads);
  return felzenszwalb_segment(build_graph(normals, cfg.knn, threads), cfg);
}

LabeledCloud ensemble(const LabeledCloud& scene, const Oversegmentation& overseg,
                      const MergeConfig& cfg) {
  scene.validate();
  cfg.validate();
  if (overseg.segment_id.size() != scene.size()) {
    throw Error(ErrorCode::kMalformedInput,
                "over-segmentation covers " + std::to_string(overseg.segment_id.size()) +
                    " points but the scene has " + std::to_string(scene.size()));
  }
  const std::uint64_t offset = scene.max_label();
  if (offset + overseg.segment_count() > std::numeric_limits<Label>::max()) {
    throw Error(ErrorCode::kPrecondition, "label space exhausted by over-segment IDs");
  }

  LabeledCloud segments;
  segments.points = scene.points;
  segments.labels.resize(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (overseg.segment_id[i] == 0) {
      throw Error(ErrorCode::kMalformedInput, "segment IDs must be >= 1");
    }
    segments.labels[i] = static_cast<Label>(offset + overseg.segment_id[i]);
  }

  CorrespondenceSet identity;
  identity.pairs.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    identity.pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i));
  }

  LabelUnionFind classes;
  for (const auto& [m, s] : merge_decisions(overlap_stats(scene, segments, identity), cfg.delta)) {
    classes.unite(m, s);
  }
  for (const auto& [s, m] : merge_decisions(overlap_stats(segments, scene, identity), cfg.delta)) {
    classes.unite(m, s);
  }

  LabeledCloud out;
  out.points = scene.points;
  out.labels.resize(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    out.labels[i] = classes.canonical(segments.labels[i]);
  }
  return out;
}

}  // namespace masklift
