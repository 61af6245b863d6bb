#include "masklift/cloud.hpp"

#include <algorithm>

#include "masklift/error.hpp"

namespace masklift {

void LabeledCloud::append(const LabeledCloud& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

void LabeledCloud::validate() const {
  if (points.size() != labels.size()) {
    throw Error(ErrorCode::kMalformedInput, "cloud has mismatched point and label counts");
  }
  for (const auto& p : points) {
    if (!p.allFinite()) {
      throw Error(ErrorCode::kMalformedInput, "cloud contains a non-finite coordinate");
    }
  }
}

std::set<Label> LabeledCloud::label_set() const {
  std::set<Label> out;
  for (Label l : labels) {
    if (l != kUnlabeled) out.insert(l);
  }
  return out;
}

Label LabeledCloud::max_label() const noexcept {
  return labels.empty() ? kUnlabeled : *std::max_element(labels.begin(), labels.end());
}

void round_to_float(LabeledCloud& cloud) {
  // Flat loop over the coordinate array. GCC 11 at -O3 miscompiles the
  // per-point form (only z gets rounded in the vectorized tail).
  static_assert(sizeof(Point3) == 3 * sizeof(double));
  if (cloud.points.empty()) return;
  double* coords = cloud.points.data()->data();
  const std::size_t n = cloud.points.size() * 3;
  for (std::size_t i = 0; i < n; ++i) coords[i] = static_cast<double>(static_cast<float>(coords[i]));
}

}  // namespace masklift
