#pragma once

#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "masklift/cloud.hpp"

namespace masklift {

/// Disjoint sets over 0..n-1 with path halving and union by size.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n = 0) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  /// Returns the new root, or the shared root when already joined.
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

  std::size_t set_size(std::size_t x) { return size_[find(x)]; }
  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Union-find keyed by mask label. canonical() yields the smallest label of
/// the class, so the result does not depend on the order of unite() calls.
class LabelUnionFind {
 public:
  void add(Label l) {
    if (index_.try_emplace(l, labels_.size()).second) {
      labels_.push_back(l);
      dirty_ = true;
    }
  }

  void unite(Label a, Label b) {
    add(a);
    add(b);
    pending_.emplace_back(a, b);
    dirty_ = true;
  }

  /// Smallest label in the class of l; labels never added map to themselves.
  Label canonical(Label l) {
    resolve();
    const auto it = index_.find(l);
    if (it == index_.end()) return l;
    return min_of_root_[sets_.find(it->second)];
  }

 private:
  void resolve() {
    if (!dirty_) return;
    sets_ = DisjointSet(labels_.size());
    for (const auto& [a, b] : pending_) sets_.unite(index_.at(a), index_.at(b));
    min_of_root_.assign(labels_.size(), 0);
    std::vector<bool> seen(labels_.size(), false);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      const std::size_t r = sets_.find(i);
      if (!seen[r] || labels_[i] < min_of_root_[r]) {
        min_of_root_[r] = labels_[i];
        seen[r] = true;
      }
    }
    dirty_ = false;
  }

  std::unordered_map<Label, std::size_t> index_;
  std::vector<Label> labels_;
  std::vector<std::pair<Label, Label>> pending_;
  DisjointSet sets_;
  std::vector<Label> min_of_root_;
  bool dirty_ = false;
};

}  // namespace masklift
