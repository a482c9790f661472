#include <benchmark/benchmark.h>

#include "scalemap/core/generate.hpp"

namespace {

void BM_GenerateBlock(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t id = 0;
  for (auto _ : state) {
    auto block = scalemap::generate_block(42, id++, n);
    benchmark::DoNotOptimize(block);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.SetBytesProcessed(state.iterations() * state.range(0) * 24);
}
BENCHMARK(BM_GenerateBlock)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

void BM_SplitMixNext(benchmark::State& state) {
  scalemap::SplitMix64 rng(0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.next());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SplitMixNext);

}  // namespace

BENCHMARK_MAIN();
