#include <doctest.h>

#include <cmath>
#include <random>

#include "masklift/error.hpp"
#include "masklift/merge.hpp"
#include "masklift/union_find.hpp"
#include "oracles.hpp"

using namespace masklift;

namespace {

MergeConfig no_pool(double radius = 0.05, double delta = 0.5) {
  MergeConfig cfg;
  cfg.delta = delta;
  cfg.match_radius = radius;
  cfg.pool_after_merge = false;
  return cfg;
}

// Two clouds on a shared grid of cells; labels come from disjoint ranges.
std::pair<LabeledCloud, LabeledCloud> random_pair(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 100);
  std::uniform_int_distribution<int> masks(1, 5);
  std::uniform_int_distribution<int> cell(0, 9);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  std::bernoulli_distribution unlabeled(0.1);
  auto make = [&](Label base) {
    LabeledCloud c;
    const int n = count(rng);
    std::uniform_int_distribution<Label> lab(base, base + static_cast<Label>(masks(rng)) - 1);
    for (int i = 0; i < n; ++i) {
      const Point3 p{cell(rng) * 0.05 + jitter(rng), cell(rng) * 0.05 + jitter(rng), jitter(rng)};
      c.push_back(p, unlabeled(rng) ? 0 : lab(rng));
    }
    return c;
  };
  auto a = make(1);
  auto b = make(100);
  return {a, b};
}

}  // namespace

TEST_CASE("find_correspondences examples") {
  LabeledCloud x;
  x.push_back({0, 0, 0}, 1);
  x.push_back({1, 0, 0}, 1);
  x.push_back({0, 1, 0}, 2);
  const auto id = find_correspondences(x, x, 0.1);
  REQUIRE(id.pairs.size() == 3);
  for (std::uint32_t i = 0; i < 3; ++i) CHECK(id.pairs[i] == std::make_pair(i, i));

  LabeledCloud a, b;
  a.push_back({0, 0, 0}, 1);
  b.push_back({0.2, 0, 0}, 2);
  CHECK(find_correspondences(a, b, 0.1).pairs.empty());

  LabeledCloud c;
  c.push_back({0.07, 0, 0}, 2);
  c.push_back({0.03, 0, 0}, 2);
  const auto near = find_correspondences(a, c, 0.1);
  REQUIRE(near.pairs.size() == 1);
  CHECK(near.pairs[0].second == 1);

  LabeledCloud tie;
  tie.push_back({0.05, 0, 0}, 2);
  tie.push_back({-0.05, 0, 0}, 2);
  CHECK(find_correspondences(a, tie, 0.1).pairs[0].second == 0);

  CHECK(find_correspondences(LabeledCloud{}, a, 0.1).pairs.empty());
  CHECK_THROWS_AS(find_correspondences(a, c, 0.0), Error);
}

TEST_CASE("find_correspondences matches the brute-force oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto [a, b] = random_pair(rng);
    const double r = 0.01 + 0.01 * (trial % 6);
    CHECK(find_correspondences(a, b, r, trial % 3 + 1).pairs == oracle::brute_correspondences(a, b, r));
  }
}

TEST_CASE("overlap_stats hand-counted instance") {
  LabeledCloud x1, x2;
  for (int i = 0; i < 10; ++i) x1.push_back({i * 1.0, 0, 0}, 7);
  for (int j = 0; j < 8; ++j) x2.push_back({j * 1.0, 0, 0}, 9);
  x1.push_back({50, 0, 0}, 0);
  x2.push_back({60, 0, 0}, 0);
  CorrespondenceSet corr;
  for (std::uint32_t i = 0; i < 6; ++i) corr.pairs.emplace_back(i, i);
  corr.pairs.emplace_back(10, 8);  // unlabeled on both sides
  corr.pairs.emplace_back(7, 8);   // unlabeled on one side
  const auto s = overlap_stats(x1, x2, corr);
  CHECK(s.count1.at(7) == 10);
  CHECK(s.count2.at(9) == 8);
  CHECK(s.cross.size() == 1);
  CHECK(s.cross.at({7, 9}) == 6);
  CHECK_FALSE(s.count1.contains(0));

  const auto none = overlap_stats(x1, x2, {});
  CHECK(none.cross.empty());
  CHECK(none.count1.at(7) == 10);

  CorrespondenceSet bad;
  bad.pairs.emplace_back(0, 99);
  try {
    overlap_stats(x1, x2, bad);
    FAIL("expected malformed correspondence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedCorrespondence);
  }
}

TEST_CASE("merge_decisions uses a strict threshold") {
  OverlapStats s;
  s.count1[1] = 10;
  s.count2[2] = 8;
  s.cross[{1, 2}] = 6;
  CHECK(merge_decisions(s, 0.5) == std::vector<MergePair>{{1, 2}});
  s.cross[{1, 2}] = 4;
  CHECK(merge_decisions(s, 0.5).empty());
  CHECK(merge_decisions(OverlapStats{}, 0.5).empty());
}

TEST_CASE("bidirectional_merge examples") {
  LabeledCloud surface1, surface2;
  for (int i = 0; i < 20; ++i) {
    surface1.push_back({i * 0.02, 0, 0}, 4);
    surface2.push_back({i * 0.02 + 0.005, 0, 0}, 11);
  }
  const auto same = bidirectional_merge(surface1, surface2, no_pool());
  CHECK(same.size() == 40);
  CHECK(same.label_set() == std::set<Label>{4});

  LabeledCloud far = surface2;
  for (auto& p : far.points) p.y() += 5.0;
  CHECK(bidirectional_merge(surface1, far, no_pool()).label_set() == std::set<Label>{4, 11});

  const auto alone = bidirectional_merge(surface1, LabeledCloud{}, no_pool());
  CHECK(alone.labels == surface1.labels);
  MergeConfig pooled = no_pool();
  pooled.pool_after_merge = true;
  CHECK(bidirectional_merge(surface1, LabeledCloud{}, pooled).labels ==
        grid_pool(surface1, pooled.pool).labels);

  try {
    bidirectional_merge(surface1, surface1, no_pool());
    FAIL("expected precondition error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPrecondition);
  }
}

TEST_CASE("bidirectional_merge matches the union-find oracle and its properties") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto [a, b] = random_pair(rng);
    const auto cfg = no_pool(0.03, trial % 2 ? 0.5 : 0.3);
    const auto out = bidirectional_merge(a, b, cfg);
    REQUIRE(out.size() == a.size() + b.size());
    CHECK(out.labels == oracle::merged_labels(a, b, cfg.match_radius, cfg.delta));

    // Coarsening: points sharing an input label share an output label.
    std::vector<Label> in = a.labels;
    in.insert(in.end(), b.labels.begin(), b.labels.end());
    std::map<Label, Label> image;
    for (std::size_t i = 0; i < in.size(); ++i) {
      const auto [it, ins] = image.try_emplace(in[i], out.labels[i]);
      CHECK(it->second == out.labels[i]);
    }

    // Swapping inputs yields the same classes.
    const auto swapped = bidirectional_merge(b, a, cfg);
    std::vector<Label> reordered(swapped.labels.begin() + static_cast<long>(b.size()), swapped.labels.end());
    reordered.insert(reordered.end(), swapped.labels.begin(), swapped.labels.begin() + static_cast<long>(b.size()));
    CHECK(reordered == out.labels);
  }
}

TEST_CASE("bottom_up_merge tree shape") {
  for (std::size_t k = 1; k <= 64; ++k) {
    std::vector<LabeledCloud> clouds(k);
    for (std::size_t i = 0; i < k; ++i) clouds[i].push_back({static_cast<double>(i), 0, 0}, static_cast<Label>(i + 1));
    const auto r = bottom_up_merge(clouds, no_pool(), 4);
    const auto levels = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(k))));
    CHECK(r.trace.levels.size() == levels);
    CHECK(r.trace.merge_count() == k - 1);
    CHECK(r.cloud.size() == k);
  }
}

TEST_CASE("bottom_up_merge pairs adjacent clouds and carries the odd one") {
  std::vector<LabeledCloud> clouds(5);
  for (std::size_t i = 0; i < 5; ++i) clouds[i].push_back({static_cast<double>(i), 0, 0}, static_cast<Label>(i + 1));
  const auto r = bottom_up_merge(clouds, no_pool());
  REQUIRE(r.trace.levels.size() == 3);
  CHECK(r.trace.levels[0].merges.size() == 2);
  CHECK(r.trace.levels[0].merges[0].left == 0);
  CHECK(r.trace.levels[0].merges[0].right == 1);
  CHECK(r.trace.levels[0].merges[1].left == 2);
  CHECK(r.trace.levels[0].merges[1].right == 3);
  CHECK(r.trace.levels[0].carried == std::optional<std::size_t>{4});
  CHECK(r.trace.levels[1].merges.size() == 1);
  CHECK(r.trace.levels[1].carried == std::optional<std::size_t>{2});
  CHECK(r.trace.levels[2].merges.size() == 1);
  CHECK_FALSE(r.trace.levels[2].carried);

  std::vector<LabeledCloud> four(clouds.begin(), clouds.begin() + 4);
  const auto r4 = bottom_up_merge(four, no_pool());
  CHECK(r4.trace.levels.size() == 2);
  CHECK(r4.trace.merge_count() == 3);

  MergeConfig pooled = no_pool();
  pooled.pool_after_merge = true;
  LabeledCloud dup;
  dup.push_back({0.01, 0.01, 0.01}, 3);
  dup.push_back({0.02, 0.01, 0.01}, 3);
  const auto single = bottom_up_merge({dup}, pooled);
  CHECK(single.trace.merge_count() == 0);
  CHECK(single.cloud.size() == 1);

  CHECK_THROWS_AS(bottom_up_merge({}, pooled), Error);
}

TEST_CASE("bottom_up_merge is independent of the thread count") {
  std::mt19937_64 rng(8);
  std::vector<LabeledCloud> clouds;
  Label base = 1;
  for (int f = 0; f < 11; ++f) {
    auto [a, b] = random_pair(rng);
    for (auto& l : a.labels) {
      if (l) l += base;
    }
    base += 10;
    clouds.push_back(a);
  }
  MergeConfig cfg;
  cfg.pool.voxel_size = 0.03;
  const auto one = bottom_up_merge(clouds, cfg, 1);
  const auto many = bottom_up_merge(clouds, cfg, 8);
  CHECK(one.cloud.labels == many.cloud.labels);
  CHECK(one.cloud.points == many.cloud.points);
}

TEST_CASE("LabelUnionFind picks the smallest label per class") {
  LabelUnionFind uf;
  uf.unite(9, 4);
  uf.unite(4, 12);
  uf.add(30);
  CHECK(uf.canonical(12) == 4);
  CHECK(uf.canonical(9) == 4);
  CHECK(uf.canonical(30) == 30);
  CHECK(uf.canonical(77) == 77);
  uf.unite(30, 2);
  CHECK(uf.canonical(30) == 2);
  CHECK(uf.canonical(12) == 4);
}

TEST_CASE("MergeConfig validation") {
  MergeConfig cfg;
  cfg.delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.delta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.delta = 1.0;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.effective_radius() == cfg.pool.voxel_size);
}
