#pragma once

#include <span>
#include <string>
#include <vector>

#include "masklift/cloud.hpp"

namespace masklift {

struct InstanceMatch {
  Label gt = kUnlabeled;
  Label pred = kUnlabeled;  // 0 when the instance is unmatched
  double iou = 0.0;
};

struct MatchReport {
  /// One entry per ground-truth instance, ascending by gt label.
  std::vector<InstanceMatch> matches;
  double mean_iou = 0.0;
  std::size_t pred_count = 0;
  std::size_t gt_count = 0;
  std::size_t unmatched_pred = 0;
  std::size_t unmatched_gt = 0;

  std::string to_json() const;
};

/// Maximum-weight one-to-one assignment on a rows x cols weight matrix
/// (row-major). Returns the assigned column per row, or -1.
std::vector<int> max_weight_assignment(std::span<const double> weights, std::size_t rows,
                                       std::size_t cols);

/// Instance IoU matching that maximizes total IoU. Label 0 is ignored on both
/// sides; unmatched ground-truth instances count as IoU 0 in the mean.
MatchReport hungarian_match_iou(std::span<const Label> pred, std::span<const Label> gt);

}  // namespace masklift
