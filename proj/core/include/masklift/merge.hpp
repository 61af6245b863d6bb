#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "masklift/cloud.hpp"
#include "masklift/gridpool.hpp"

namespace masklift {

/// Matched point pairs (index into the first cloud, index into the second).
/// Each first-cloud index appears at most once.
struct CorrespondenceSet {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
};

/// Mask sizes on each side and cross-mask match counts.
struct OverlapStats {
  std::map<Label, std::size_t> count1;
  std::map<Label, std::size_t> count2;
  std::map<std::pair<Label, Label>, std::size_t> cross;
};

struct MergeConfig {
  double delta = 0.5;
  /// Correspondence radius in meters. Non-positive means "use the voxel size".
  double match_radius = 0.0;
  bool pool_after_merge = true;
  PoolConfig pool;

  double effective_radius() const { return match_radius > 0.0 ? match_radius : pool.voxel_size; }
  void validate() const;
};

using MergePair = std::pair<Label, Label>;

/// For each x1 point, its nearest x2 point within `radius` (ties to the smaller index).
CorrespondenceSet find_correspondences(const LabeledCloud& x1, const LabeledCloud& x2,
                                       double radius, unsigned threads = 1);

/// Label histograms of both clouds and label co-occurrence over `corr`. Label 0
/// is excluded everywhere.
OverlapStats overlap_stats(const LabeledCloud& x1, const LabeledCloud& x2,
                           const CorrespondenceSet& corr);

/// Pairs (m, n) with cross[m, n] > delta * min(count1[m], count2[n]), ascending.
std::vector<MergePair> merge_decisions(const OverlapStats& stats, double delta);

struct MergeResult {
  LabeledCloud cloud;
  /// Unified (x1 label, x2 label) pairs from both directions, deduplicated.
  std::vector<MergePair> unified;
};

/// Bidirectional merge: correspondences and decisions are computed x1 -> x2
/// and x2 -> x1, every decision is applied through one union-find, and each
/// class is relabeled to its smallest ID. Output is x1 followed by x2,
/// optionally grid pooled.
MergeResult bidirectional_merge_detailed(const LabeledCloud& x1, const LabeledCloud& x2,
                                         const MergeConfig& cfg, unsigned threads = 1);

LabeledCloud bidirectional_merge(const LabeledCloud& x1, const LabeledCloud& x2,
                                 const MergeConfig& cfg, unsigned threads = 1);

struct MergeRecord {
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t merged_pairs = 0;
};

struct MergeLevel {
  std::vector<MergeRecord> merges;
  /// Index of the unpaired trailing cloud promoted unchanged, if any.
  std::optional<std::size_t> carried;
};

struct MergeTreeTrace {
  std::vector<MergeLevel> levels;
  std::size_t merge_count() const;
};

struct BottomUpResult {
  LabeledCloud cloud;
  MergeTreeTrace trace;
};

/// Pairwise reduction (2i, 2i+1) per level until one cloud remains. Sibling
/// merges within a level run on up to `threads` workers.
BottomUpResult bottom_up_merge(std::vector<LabeledCloud> clouds, const MergeConfig& cfg,
                               unsigned threads = 1);

}  // namespace masklift
