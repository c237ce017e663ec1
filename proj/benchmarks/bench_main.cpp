#include <benchmark/benchmark.h>

#include <random>

#include "ilsbm/infer.hpp"
#include "ilsbm/layered.hpp"
#include "ilsbm/synth.hpp"

using namespace ilsbm;

namespace {

synth::Planted planted(std::size_t n, std::size_t layers) {
  const std::size_t g = n / 4;
  std::vector<double> e(16, 2.0 * static_cast<double>(g));
  for (int r = 0; r < 4; ++r) e[r * 5] = 12.0 * static_cast<double>(g);
  auto spec = synth::PlantedSpec::uniform_weights({g, g, g, n - 3 * g}, std::vector<int>(layers, 0), {e}, 4.0, 1.0);
  return synth::sample(spec, 1);
}

void BM_LayeredDl(benchmark::State& state) {
  const auto p = planted(static_cast<std::size_t>(state.range(0)), 8);
  const auto bins = BinSet::from_bins({{0, 1, 2}, {3, 4}, {5, 6, 7}}, 8, BinningKind::kContiguous);
  for (auto _ : state) benchmark::DoNotOptimize(layered::layered_dl(p.graph, p.partition, bins).total);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * p.graph.num_edges()));
}
BENCHMARK(BM_LayeredDl)->Arg(100)->Arg(400);

void BM_MoveDelta(benchmark::State& state) {
  const auto p = planted(static_cast<std::size_t>(state.range(0)), 4);
  LayeredBlockState st(p.graph, p.partition);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<NodeIndex> node(0, static_cast<NodeIndex>(p.graph.num_nodes() - 1));
  std::uniform_int_distribution<int> group(0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(st.move_delta_bits(node(rng), group(rng)));
}
BENCHMARK(BM_MoveDelta)->Arg(100)->Arg(400);

void BM_SamplerSweep(benchmark::State& state) {
  const auto p = planted(static_cast<std::size_t>(state.range(0)), 4);
  infer::PartitionSampler sampler(p.graph, p.partition, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sweep(1.0));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * p.graph.num_nodes()));
}
BENCHMARK(BM_SamplerSweep)->Arg(100)->Arg(400);

void BM_FitPartition(benchmark::State& state) {
  const auto p = planted(static_cast<std::size_t>(state.range(0)), 1);
  infer::FitConfig config;
  config.n_sweeps = 200;
  config.n_anneal = 1;
  for (auto _ : state) benchmark::DoNotOptimize(infer::fit_partition(p.graph, config).bits);
}
BENCHMARK(BM_FitPartition)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SearchGranularityFig2(benchmark::State& state) {
  const auto g = synth::fig2_benchmark(1);
  infer::FitConfig config;
  config.n_sweeps = 300;
  config.n_anneal = 2;
  for (auto _ : state) benchmark::DoNotOptimize(infer::search_granularity(g, config).og.dl.total);
}
BENCHMARK(BM_SearchGranularityFig2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
