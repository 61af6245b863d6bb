#include <benchmark/benchmark.h>

#include <random>

#include "masklift/camera.hpp"
#include "masklift/gridpool.hpp"
#include "masklift/merge.hpp"
#include "masklift/overseg.hpp"

using namespace masklift;

namespace {

LabeledCloud random_cloud(std::size_t n, Label first_label, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 2.0);
  std::uniform_int_distribution<Label> lab(first_label, first_label + 19);
  LabeledCloud c;
  c.reserve(n);
  for (std::size_t i = 0; i < n; ++i) c.push_back({coord(rng), coord(rng), coord(rng) * 0.2}, lab(rng));
  return c;
}

void BM_UnprojectFrame(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> raw(1, 8000);
  DepthFrame frame{640, 480, std::vector<std::uint16_t>(640 * 480), 1000.0};
  for (auto& d : frame.depth) d = static_cast<std::uint16_t>(raw(rng));
  const CameraIntrinsics intr{577.0, 577.0, 319.5, 239.5};
  const FrameSampling sampling{static_cast<int>(state.range(0)), 10.0};
  for (auto _ : state) benchmark::DoNotOptimize(unproject_frame(frame, intr, {}, sampling));
  state.SetItemsProcessed(state.iterations() * (640 / state.range(0)) * (480 / state.range(0)));
}
BENCHMARK(BM_UnprojectFrame)->Arg(1)->Arg(4);

void BM_GridPool(benchmark::State& state) {
  const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(grid_pool(cloud, {0.05}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GridPool)->Arg(10000)->Arg(200000);

void BM_FindCorrespondences(benchmark::State& state) {
  const auto a = random_cloud(static_cast<std::size_t>(state.range(0)), 1, 3);
  const auto b = random_cloud(static_cast<std::size_t>(state.range(0)), 100, 4);
  for (auto _ : state) benchmark::DoNotOptimize(find_correspondences(a, b, 0.05));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FindCorrespondences)->Arg(10000)->Arg(100000);

void BM_BidirectionalMerge(benchmark::State& state) {
  const auto a = random_cloud(static_cast<std::size_t>(state.range(0)), 1, 5);
  const auto b = random_cloud(static_cast<std::size_t>(state.range(0)), 100, 6);
  MergeConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(bidirectional_merge(a, b, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_BidirectionalMerge)->Arg(10000)->Arg(100000);

void BM_BottomUpMerge(benchmark::State& state) {
  std::vector<LabeledCloud> clouds;
  for (int i = 0; i < state.range(0); ++i) {
    clouds.push_back(random_cloud(5000, static_cast<Label>(1 + 20 * i), 7 + i));
  }
  MergeConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(bottom_up_merge(clouds, cfg, 1));
}
BENCHMARK(BM_BottomUpMerge)->Arg(16)->Arg(64);

void BM_Oversegment(benchmark::State& state) {
  const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 1, 8);
  for (auto _ : state) benchmark::DoNotOptimize(oversegment(cloud.points, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Oversegment)->Arg(10000)->Arg(50000);

void BM_FelzenszwalbOnly(benchmark::State& state) {
  const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 1, 9);
  const auto graph = build_graph(estimate_normals(cloud.points, 16), 16);
  for (auto _ : state) benchmark::DoNotOptimize(felzenszwalb_segment(graph, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FelzenszwalbOnly)->Arg(50000);

}  // namespace
BENCHMARK_MAIN();
