#include "masklift/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include <json.hpp>

#include "masklift/error.hpp"

namespace masklift {

std::vector<int> max_weight_assignment(std::span<const double> weights, std::size_t rows,
                                       std::size_t cols) {
  // Shortest augmenting path Hungarian algorithm on a square cost matrix
  // (cost = max - weight), 1-based with a virtual column 0.
  const std::size_t n = std::max(rows, cols);
  std::vector<int> result(rows, -1);
  if (n == 0) return result;
  double max_w = 0.0;
  for (double w : weights) max_w = std::max(max_w, w);
  auto cost = [&](std::size_t r, std::size_t c) {
    const double w = (r < rows && c < cols) ? weights[r * cols + c] : 0.0;
    return max_w - w;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0 && p[j] - 1 < rows && j - 1 < cols) {
      result[p[j] - 1] = static_cast<int>(j - 1);
    }
  }
  return result;
}

MatchReport hungarian_match_iou(std::span<const Label> pred, std::span<const Label> gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kAlignment, "prediction has " + std::to_string(pred.size()) +
                                           " labels but ground truth has " +
                                           std::to_string(gt.size()));
  }
  std::map<Label, std::size_t> pred_size, gt_size;
  std::map<std::pair<Label, Label>, std::size_t> inter;  // (gt, pred)
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] != kUnlabeled) ++pred_size[pred[i]];
    if (gt[i] != kUnlabeled) ++gt_size[gt[i]];
    if (pred[i] != kUnlabeled && gt[i] != kUnlabeled) ++inter[{gt[i], pred[i]}];
  }

  std::vector<Label> gt_ids, pred_ids;
  for (const auto& [l, n] : gt_size) gt_ids.push_back(l);
  for (const auto& [l, n] : pred_size) pred_ids.push_back(l);
  std::map<Label, std::size_t> gt_row, pred_col;
  for (std::size_t r = 0; r < gt_ids.size(); ++r) gt_row[gt_ids[r]] = r;
  for (std::size_t c = 0; c < pred_ids.size(); ++c) pred_col[pred_ids[c]] = c;

  std::vector<double> iou(gt_ids.size() * pred_ids.size(), 0.0);
  for (const auto& [key, shared] : inter) {
    const auto [g, p] = key;
    const double uni = static_cast<double>(gt_size[g] + pred_size[p] - shared);
    iou[gt_row[g] * pred_ids.size() + pred_col[p]] = static_cast<double>(shared) / uni;
  }

  const auto assignment = max_weight_assignment(iou, gt_ids.size(), pred_ids.size());
  MatchReport report;
  report.gt_count = gt_ids.size();
  report.pred_count = pred_ids.size();
  double total = 0.0;
  std::size_t matched = 0;
  for (std::size_t r = 0; r < gt_ids.size(); ++r) {
    InstanceMatch m;
    m.gt = gt_ids[r];
    const int c = assignment[r];
    if (c >= 0) {
      const double value = iou[r * pred_ids.size() + static_cast<std::size_t>(c)];
      if (value > 0.0) {
        m.pred = pred_ids[static_cast<std::size_t>(c)];
        m.iou = value;
        ++matched;
      }
    }
    total += m.iou;
    report.matches.push_back(m);
  }
  report.mean_iou = gt_ids.empty() ? 0.0 : total / static_cast<double>(gt_ids.size());
  report.unmatched_gt = gt_ids.size() - matched;
  report.unmatched_pred = pred_ids.size() - matched;
  return report;
}

std::string MatchReport::to_json() const {
  nlohmann::json doc;
  doc["mean_iou"] = mean_iou;
  doc["pred_count"] = pred_count;
  doc["gt_count"] = gt_count;
  doc["unmatched_pred"] = unmatched_pred;
  doc["unmatched_gt"] = unmatched_gt;
  auto& list = doc["matches"] = nlohmann::json::array();
  for (const auto& m : matches) {
    list.push_back({{"gt", m.gt}, {"pred", m.pred}, {"iou", m.iou}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace masklift
