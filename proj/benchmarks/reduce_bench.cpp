#include <benchmark/benchmark.h>

#include <filesystem>

#include "scalemap/core/params.hpp"
#include "scalemap/engine/context.hpp"

namespace {

scalemap::BenchmarkParams small_params(std::uint64_t cores) {
  scalemap::BenchmarkParams p;
  p.vectors_per_unit = 4096;
  p.blocks = 16;
  p.block_size_units = 4;
  p.cores = cores;
  return p;
}

// Unpersisted pipeline: every action regenerates, shifts and folds.
void BM_ShiftAverage(benchmark::State& state) {
  const auto p = small_params(static_cast<std::uint64_t>(state.range(0)));
  scalemap::engine::Context ctx({1, std::uint64_t{1} << 30, std::filesystem::temp_directory_path()});
  const auto mapped = ctx.map_shift(ctx.source(p), {1.0, 2.0, 3.0});
  for (auto _ : state) benchmark::DoNotOptimize(ctx.reduce_average(mapped));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.total_vectors()));
}
BENCHMARK(BM_ShiftAverage)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_AverageOfPartials(benchmark::State& state) {
  std::vector<scalemap::engine::PartialSum> partials(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < partials.size(); ++i) partials[i] = {{double(i), 1.0, 2.0}, 4096};
  for (auto _ : state) benchmark::DoNotOptimize(scalemap::engine::average_of(partials));
}
BENCHMARK(BM_AverageOfPartials)->Arg(12)->Arg(1024);

}  // namespace
