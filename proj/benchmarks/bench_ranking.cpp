// Microbenchmarks for the per-frame ranking path, whose cost should grow as
// O(N log N) in the anchor count: distance evaluation is linear and the sort
// contributes the log factor.

#include <benchmark/benchmark.h>

#include "dal/anchors.hpp"
#include "dal/linalg.hpp"
#include "dal/rng.hpp"

namespace {

constexpr std::size_t kDim = 32;

std::vector<dal::Vec> random_anchors(std::size_t n, std::uint64_t seed) {
  dal::Rng rng(seed);
  std::vector<dal::Vec> anchors(n, dal::Vec(kDim));
  for (auto& a : anchors) {
    for (auto& x : a) x = rng.normal();
  }
  return anchors;
}

void BM_distance_row(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto anchors = random_anchors(n, 7);
  dal::Rng rng(11);
  dal::Vec frame(kDim);
  for (auto& x : frame) x = rng.normal();

  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dal::distance_row(frame, anchors, dal::Precision::f64));
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}

void BM_cyclic_rank(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<std::vector<dal::Vec>>> frames(2);
  dal::Rng rng(13);
  for (std::size_t k = 0; k < 2; ++k) {
    frames[k].resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      dal::Vec v(kDim);
      for (auto& x : v) x = rng.normal();
      frames[k][t].push_back(std::move(v));
    }
  }
  const dal::AnchorBank bank = dal::init_anchor_bank(frames, 0.5);

  std::size_t query = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dal::cyclic_rank(bank, 0, query, 1));
    query = (query + 1) % n;
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}

}  // namespace

BENCHMARK(BM_distance_row)->RangeMultiplier(2)->Range(64, 2048)->Complexity();
BENCHMARK(BM_cyclic_rank)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

BENCHMARK_MAIN();
