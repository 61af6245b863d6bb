#include "masklift/merge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "masklift/error.hpp"
#include "masklift/parallel.hpp"
#include "masklift/spatial_hash.hpp"
#include "masklift/union_find.hpp"

namespace masklift {

void MergeConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::kConfig, "delta must lie in (0, 1]");
  }
  if (!std::isfinite(match_radius)) {
    throw Error(ErrorCode::kConfig, "match radius must be finite");
  }
  pool.validate();
}

CorrespondenceSet find_correspondences(const LabeledCloud& x1, const LabeledCloud& x2,
                                       double radius, unsigned threads) {
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::kConfig, "correspondence radius must be positive");
  }
  CorrespondenceSet corr;
  if (x1.empty() || x2.empty()) return corr;

  const SpatialHashGrid grid(x2.points, radius);
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> match(x1.size(), kNone);
  parallel_for(x1.size(), threads, [&](std::size_t i) {
    if (const auto j = grid.nearest_within(x1.points[i], radius)) {
      match[i] = static_cast<std::uint32_t>(*j);
    }
  });

  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] != kNone) corr.pairs.emplace_back(static_cast<std::uint32_t>(i), match[i]);
  }
  return corr;
}

OverlapStats overlap_stats(const LabeledCloud& x1, const LabeledCloud& x2,
                           const CorrespondenceSet& corr) {
  OverlapStats stats;
  for (Label l : x1.labels) {
    if (l != kUnlabeled) ++stats.count1[l];
  }
  for (Label l : x2.labels) {
    if (l != kUnlabeled) ++stats.count2[l];
  }
  std::vector<bool> used(x1.size(), false);
  for (const auto& [i, j] : corr.pairs) {
    if (i >= x1.size() || j >= x2.size()) {
      throw Error(ErrorCode::kMalformedCorrespondence,
                  "correspondence (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") is out of range");
    }
    if (used[i]) {
      throw Error(ErrorCode::kMalformedCorrespondence,
                  "point " + std::to_string(i) + " has more than one correspondence");
    }
    used[i] = true;
    const Label m = x1.labels[i];
    const Label n = x2.labels[j];
    if (m != kUnlabeled && n != kUnlabeled) ++stats.cross[{m, n}];
  }
  return stats;
}

std::vector<MergePair> merge_decisions(const OverlapStats& stats, double delta) {
  std::vector<MergePair> out;
  for (const auto& [key, shared] : stats.cross) {
    const auto smaller = std::min(stats.count1.at(key.first), stats.count2.at(key.second));
    if (static_cast<double>(shared) > delta * static_cast<double>(smaller)) {
      out.push_back(key);
    }
  }
  return out;
}

namespace {

void require_disjoint_labels(const LabeledCloud& x1, const LabeledCloud& x2) {
  const auto a = x1.label_set();
  const auto b = x2.label_set();
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) {
      throw Error(ErrorCode::kPrecondition,
                  "mask ID " + std::to_string(*ia) + " appears in both clouds");
    }
    *ia < *ib ? ++ia : ++ib;
  }
}

}  // namespace

MergeResult bidirectional_merge_detailed(const LabeledCloud& x1, const LabeledCloud& x2,
                                         const MergeConfig& cfg, unsigned threads) {
  cfg.validate();
  x1.validate();
  x2.validate();
  require_disjoint_labels(x1, x2);

  const double radius = cfg.effective_radius();
  const auto forward = merge_decisions(
      overlap_stats(x1, x2, find_correspondences(x1, x2, radius, threads)), cfg.delta);
  const auto backward = merge_decisions(
      overlap_stats(x2, x1, find_correspondences(x2, x1, radius, threads)), cfg.delta);

  MergeResult result;
  result.unified = forward;
  for (const auto& [n, m] : backward) result.unified.emplace_back(m, n);
  std::sort(result.unified.begin(), result.unified.end());
  result.unified.erase(std::unique(result.unified.begin(), result.unified.end()),
                       result.unified.end());

  LabelUnionFind classes;
  for (const auto& [m, n] : result.unified) classes.unite(m, n);

  LabeledCloud merged;
  merged.reserve(x1.size() + x2.size());
  merged.append(x1);
  merged.append(x2);
  for (Label& l : merged.labels) {
    if (l != kUnlabeled) l = classes.canonical(l);
  }
  result.cloud = cfg.pool_after_merge ? grid_pool(merged, cfg.pool) : std::move(merged);
  return result;
}

LabeledCloud bidirectional_merge(const LabeledCloud& x1, const LabeledCloud& x2,
                                 const MergeConfig& cfg, unsigned threads) {
  return bidirectional_merge_detailed(x1, x2, cfg, threads).cloud;
}

std::size_t MergeTreeTrace::merge_count() const {
  std::size_t n = 0;
  for (const auto& level : levels) n += level.merges.size();
  return n;
}

BottomUpResult bottom_up_merge(std::vector<LabeledCloud> clouds, const MergeConfig& cfg,
                               unsigned threads) {
  if (clouds.empty()) {
    throw Error(ErrorCode::kEmptyInput, "bottom-up merge needs at least one cloud");
  }
  cfg.validate();

  BottomUpResult result;
  while (clouds.size() > 1) {
    const std::size_t pairs = clouds.size() / 2;
    MergeLevel level;
    std::vector<LabeledCloud> next(pairs);
    level.merges.resize(pairs);
    // Split the worker budget across siblings; leftover workers go to the
    // correspondence search inside each merge.
    const unsigned outer = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(pairs)));
    const unsigned inner = std::max(1U, threads / outer);
    parallel_for(pairs, outer, [&](std::size_t i) {
      auto merged = bidirectional_merge_detailed(clouds[2 * i], clouds[2 * i + 1], cfg, inner);
      level.merges[i] = {2 * i, 2 * i + 1, merged.unified.size()};
      next[i] = std::move(merged.cloud);
    });
    if (clouds.size() % 2 == 1) {
      level.carried = clouds.size() - 1;
      next.push_back(std::move(clouds.back()));
    }
    clouds = std::move(next);
    result.trace.levels.push_back(std::move(level));
  }

  result.cloud = std::move(clouds.front());
  if (result.trace.levels.empty() && cfg.pool_after_merge) {
    result.cloud = grid_pool(result.cloud, cfg.pool);
  }
  return result;
}

}  // namespace masklift
