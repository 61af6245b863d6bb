#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "masklift/camera.hpp"

namespace masklift {

/// Global instance mask ID. 0 means unlabeled.
using Label = std::uint32_t;
inline constexpr Label kUnlabeled = 0;

/// Points with one instance label each. The unit passed between pipeline stages.
struct LabeledCloud {
  std::vector<Point3> points;
  std::vector<Label> labels;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  void reserve(std::size_t n) {
    points.reserve(n);
    labels.reserve(n);
  }
  void push_back(const Point3& p, Label label) {
    points.push_back(p);
    labels.push_back(label);
  }
  void append(const LabeledCloud& other);

  /// Throws kMalformedInput on length mismatch or non-finite coordinates.
  void validate() const;

  /// Distinct nonzero labels, ascending.
  std::set<Label> label_set() const;
  Label max_label() const noexcept;
};

/// Rounds every coordinate to the nearest float, matching what the PLY writer stores.
void round_to_float(LabeledCloud& cloud);

}  // namespace masklift
