#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "masklift/error.hpp"
#include "masklift/kdtree.hpp"
#include "masklift/overseg.hpp"
#include "oracles.hpp"

using namespace masklift;

namespace {

std::vector<Point3> plane_grid(int n, const Eigen::Vector3d& u, const Eigen::Vector3d& v,
                               double step) {
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pts.push_back(u * (i * step) + v * (j * step));
  }
  return pts;
}

MergeConfig delta_half() {
  MergeConfig cfg;
  cfg.delta = 0.5;
  return cfg;
}

}  // namespace

TEST_CASE("KdTree knn matches brute force with index tie-breaking") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> grid(0, 6);
  std::vector<Point3> pts;
  for (int i = 0; i < 300; ++i) pts.push_back({grid(rng) * 0.1, grid(rng) * 0.1, grid(rng) * 0.1});
  const KdTree tree(pts);
  for (std::size_t q = 0; q < pts.size(); q += 7) {
    const auto got = tree.knn(pts[q], 9);
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t i = 0; i < pts.size(); ++i) all.emplace_back((pts[i] - pts[q]).squaredNorm(), i);
    std::sort(all.begin(), all.end());
    REQUIRE(got.size() == 9);
    for (std::size_t k = 0; k < 9; ++k) {
      CHECK(got[k].index == all[k].second);
      CHECK(got[k].sq_distance == all[k].first);
    }
  }
}

TEST_CASE("estimate_normals on analytic planes") {
  const auto flat = plane_grid(10, Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), 0.1);
  for (const auto& n : estimate_normals(flat, 8).normals) {
    CHECK((n - Eigen::Vector3d::UnitZ()).norm() < 1e-6);
  }

  const Eigen::Vector3d diag = Eigen::Vector3d(1, 1, 0).normalized();
  const auto tilted = plane_grid(10, diag, Eigen::Vector3d::UnitZ(), 0.1);
  const Eigen::Vector3d want(1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0);
  for (const auto& n : estimate_normals(tilted, 8).normals) {
    CHECK((n - want).norm() < 1e-6);
  }
}

TEST_CASE("estimate_normals on a sphere stays within 5 degrees of radial") {
  // Fibonacci lattice: near-uniform density, no pole clustering.
  std::vector<Point3> pts;
  const int n = 3000;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(1.0 - z * z);
    pts.push_back({r * std::cos(golden * i), r * std::sin(golden * i), z});
  }
  const auto nc = estimate_normals(pts, 12, 4);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(std::abs(nc.normals[i].norm() - 1.0) < 1e-6);
    const double cosang = std::abs(nc.normals[i].dot(pts[i].normalized()));
    CHECK(cosang >= std::cos(5.0 * M_PI / 180.0));
  }
}

TEST_CASE("estimate_normals requires enough points") {
  std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}};
  try {
    estimate_normals(pts, 3);
    FAIL("expected insufficient points");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientPoints);
  }
}

TEST_CASE("build_graph weights follow normal dot products") {
  NormalCloud two;
  two.points = {{0, 0, 0}, {1, 0, 0}};
  two.normals = {Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ()};
  auto g = build_graph(two, 1);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].weight == 0.0);
  two.normals[1] = Eigen::Vector3d::UnitX();
  CHECK(build_graph(two, 1).edges[0].weight == 1.0);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01(0, 1);
  NormalCloud nc;
  for (int i = 0; i < 200; ++i) {
    nc.points.push_back({n01(rng), n01(rng), n01(rng)});
    nc.normals.push_back(Eigen::Vector3d(n01(rng), n01(rng), n01(rng)).normalized());
  }
  const auto rg = build_graph(nc, 6, 3);
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& e : rg.edges) {
    CHECK(e.a < e.b);
    CHECK(seen.emplace(e.a, e.b).second);
    CHECK(std::abs(e.weight - (1.0 - std::abs(nc.normals[e.a].dot(nc.normals[e.b])))) < 1e-9);
  }
  CHECK(rg.edges.size() >= 200 * 6 / 2);
}

TEST_CASE("felzenszwalb_segment simple graphs") {
  SegGraph zero{6, {}};
  for (std::uint32_t i = 0; i + 1 < 6; ++i) zero.edges.push_back({i, i + 1, 0.0});
  CHECK(felzenszwalb_segment(zero, {16, 0.1, 1}).segment_count() == 1);

  SegGraph split{6, {{0, 1, 0.0}, {1, 2, 0.0}, {3, 4, 0.0}, {4, 5, 0.0}}};
  const auto seg = felzenszwalb_segment(split, {16, 0.1, 5});
  CHECK(seg.segment_id[0] == seg.segment_id[2]);
  CHECK(seg.segment_id[3] == seg.segment_id[5]);
  CHECK(seg.segment_id[0] != seg.segment_id[3]);
  CHECK(seg.segment_id[0] == 1);
  CHECK(seg.segment_id[3] == 2);

  SegGraph bad{2, {{0, 0, 0.1}}};
  CHECK_THROWS_AS(felzenszwalb_segment(bad, {}), Error);
}

TEST_CASE("felzenszwalb_segment equals the reference on small random graphs") {
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<int> nodes(2, 12);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  std::bernoulli_distribution coarse(0.5);
  for (int trial = 0; trial < 500; ++trial) {
    SegGraph g;
    g.node_count = static_cast<std::size_t>(nodes(rng));
    for (std::uint32_t a = 0; a < g.node_count; ++a) {
      for (std::uint32_t b = a + 1; b < g.node_count; ++b) {
        if (std::bernoulli_distribution(0.35)(rng)) {
          const double w = coarse(rng) ? std::round(weight(rng) * 4) / 4 : weight(rng);
          g.edges.push_back({a, b, w});
        }
      }
    }
    const OversegConfig cfg{16, 0.05 + 0.3 * (trial % 4), static_cast<std::size_t>(1 + trial % 4)};
    const auto got = felzenszwalb_segment(g, cfg);
    CHECK(oracle::canonical_partition(got.segment_id) ==
          oracle::felzenszwalb_reference(g, cfg.fz_k, cfg.min_segment));
  }
}

TEST_CASE("oversegment separates a right-angle dihedral") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point3> pts;
  for (int i = 0; i < 2000; ++i) pts.push_back({unit(rng), unit(rng), 0.0});
  for (int i = 0; i < 2000; ++i) pts.push_back({unit(rng), 0.0, 0.02 + unit(rng)});
  const auto seg = oversegment(pts, {});
  CHECK(seg.segment_count() >= 2);
  std::map<std::uint32_t, std::array<std::size_t, 2>> tally;
  for (std::size_t i = 0; i < pts.size(); ++i) ++tally[seg.segment_id[i]][i < 2000 ? 0 : 1];
  std::size_t majority = 0;
  for (const auto& [s, t] : tally) majority += std::max(t[0], t[1]);
  CHECK(static_cast<double>(majority) / pts.size() >= 0.99);
}

TEST_CASE("ensemble examples") {
  LabeledCloud scene;
  for (int i = 0; i < 10; ++i) scene.push_back({i * 1.0, 0, 0}, i < 5 ? 3 : 8);

  SUBCASE("identical partitions stay identical") {
    Oversegmentation seg;
    for (int i = 0; i < 10; ++i) seg.segment_id.push_back(i < 5 ? 1 : 2);
    const auto out = ensemble(scene, seg, delta_half());
    CHECK(oracle::canonical_partition(out.labels) == oracle::canonical_partition(scene.labels));
    CHECK(out.labels[0] == 3);
    CHECK(out.labels[9] == 8);
  }

  SUBCASE("unlabeled points adopt the class of a 60 percent covering mask") {
    LabeledCloud s;
    for (int i = 0; i < 10; ++i) s.push_back({i * 1.0, 0, 0}, i < 6 ? 3 : 0);
    Oversegmentation seg{std::vector<std::uint32_t>(10, 1)};
    const auto out = ensemble(s, seg, delta_half());
    CHECK(out.labels == std::vector<Label>(10, 3));
  }

  SUBCASE("a segment split 40/40 across two larger masks unifies with neither") {
    LabeledCloud s;
    // mask 1: 4 points in segment A + 6 elsewhere; mask 2 likewise; 2 unlabeled in A.
    for (int i = 0; i < 4; ++i) s.push_back({0, 0, i * 1.0}, 1);
    for (int i = 0; i < 4; ++i) s.push_back({1, 0, i * 1.0}, 2);
    for (int i = 0; i < 2; ++i) s.push_back({2, 0, i * 1.0}, 0);
    for (int i = 0; i < 6; ++i) s.push_back({3, 0, i * 1.0}, 1);
    for (int i = 0; i < 6; ++i) s.push_back({4, 0, i * 1.0}, 2);
    Oversegmentation seg;
    for (int i = 0; i < 10; ++i) seg.segment_id.push_back(1);
    for (int i = 0; i < 6; ++i) seg.segment_id.push_back(2);
    for (int i = 0; i < 6; ++i) seg.segment_id.push_back(3);
    const auto out = ensemble(s, seg, delta_half());
    std::set<Label> classes(out.labels.begin(), out.labels.end());
    CHECK(classes.size() == 3);
    CHECK(out.labels[0] != out.labels[10]);
    CHECK(out.labels[0] != out.labels[16]);
    CHECK(out.labels[10] == 1);
    CHECK(out.labels[16] == 2);
    for (Label l : out.labels) CHECK(l != 0);
  }

  SUBCASE("length mismatch is rejected") {
    Oversegmentation seg{std::vector<std::uint32_t>(3, 1)};
    try {
      ensemble(scene, seg, delta_half());
      FAIL("expected malformed input");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMalformedInput);
    }
  }
}

TEST_CASE("ensemble output respects segment boundaries and covers every point") {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<Label> lab(0, 6);
  std::uniform_int_distribution<std::uint32_t> segs(1, 15);
  for (int trial = 0; trial < 100; ++trial) {
    LabeledCloud s;
    Oversegmentation seg;
    for (int i = 0; i < 150; ++i) {
      s.push_back({i * 0.1, 0, 0}, lab(rng));
      seg.segment_id.push_back(segs(rng));
    }
    // Make ids contiguous by first appearance.
    std::map<std::uint32_t, std::uint32_t> remap;
    for (auto& id : seg.segment_id) id = remap.try_emplace(id, static_cast<std::uint32_t>(remap.size() + 1)).first->second;
    const auto out = ensemble(s, seg, delta_half());
    std::map<std::uint32_t, Label> per_segment;
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(out.labels[i] != 0);
      const auto [it, ins] = per_segment.try_emplace(seg.segment_id[i], out.labels[i]);
      CHECK(it->second == out.labels[i]);
    }
  }
}
