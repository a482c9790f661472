#include "scalemap/bench/pipeline.hpp"

#include <algorithm>
#include <spdlog/spdlog.h>

#include "scalemap/cluster/client.hpp"
#include "scalemap/core/codec.hpp"
#include "scalemap/core/generate.hpp"
#include "scalemap/engine/context.hpp"
#include "scalemap/error.hpp"

namespace scalemap::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RunRecord run_local(const BenchmarkParams& params, const PipelineOptions& options) {
  engine::EngineConfig cfg;
  cfg.slots = options.slots != 0 ? options.slots
                                 : static_cast<std::uint32_t>(params.nodes * params.cores);
  cfg.memory_budget_bytes = options.memory_budget_bytes;
  cfg.scratch_dir = options.scratch_dir;
  engine::Context ctx(cfg);

  RunRecord rec;
  rec.params = params;
  rec.mode = RunMode::Local;

  const auto total_start = Clock::now();

  auto start = Clock::now();
  engine::Dataset created = ctx.persist(ctx.source(params), options.storage);
  rec.timings.create = ctx.force(created);
  rec.timings.create_s = seconds_since(start);
  // A LoadBinary source learns its block count from the directory.
  rec.params.blocks = created.source_params().blocks;

  start = Clock::now();
  engine::Dataset mapped = ctx.persist(ctx.map_shift(created, params.shift_delta), options.storage);
  rec.timings.map = ctx.force(mapped);
  rec.timings.map_s = seconds_since(start);

  if (!options.skip_reduce) {
    start = Clock::now();
    rec.result = ctx.reduce_average(mapped);
    rec.timings.reduce_s = seconds_since(start);
  }
  rec.timings.total_s = seconds_since(total_start);
  return rec;
}

RunRecord run_cluster(const BenchmarkParams& params, const PipelineOptions& options) {
  std::vector<cluster::Stage> stages{cluster::Stage::Create, cluster::Stage::Map};
  if (!options.skip_reduce) stages.push_back(cluster::Stage::Reduce);
  const cluster::JobResult job = cluster::submit(options.master, params, stages, options.network_timeout);
  RunRecord rec;
  rec.params = params;
  rec.mode = RunMode::Cluster;
  rec.timings = job.timings;
  rec.result = job.result;
  return rec;
}

}  // namespace

RunRecord run_pipeline(const BenchmarkParams& params, const PipelineOptions& options,
                       std::uint64_t rep) {
  params.validate();
  RunRecord rec = options.mode == RunMode::Local ? run_local(params, options)
                                                 : run_cluster(params, options);
  rec.rep = rep;
  rec.timestamp = utc_timestamp();
  return rec;
}

BenchmarkParams sweep_point(const BenchmarkParams& base, const SweepSpec& sweep, std::uint64_t count) {
  BenchmarkParams p = base;
  if (sweep.axis == SweepAxis::Nodes) {
    p.nodes = count;
  } else {
    p.cores = count;
  }
  if (sweep.scaling == Scaling::Weak) p.blocks = base.blocks * count;
  return p;
}

std::vector<RunRecord> run_sweep(const BenchmarkParams& base, const SweepSpec& sweep,
                                 const PipelineOptions& options,
                                 const std::function<void(const RunRecord&)>& on_record) {
  if (sweep.counts.empty()) fail(ErrorCode::ConfigError, "sweep needs at least one count");
  if (!std::is_sorted(sweep.counts.begin(), sweep.counts.end()) ||
      std::adjacent_find(sweep.counts.begin(), sweep.counts.end()) != sweep.counts.end())
    fail(ErrorCode::ConfigError, "sweep counts must be strictly ascending");
  if (sweep.scaling == Scaling::None) fail(ErrorCode::ConfigError, "sweep needs strong or weak scaling");
  if (sweep.reps == 0) fail(ErrorCode::ConfigError, "reps must be >= 1");
  if (base.source != SourceKind::Generate)
    fail(ErrorCode::ConfigError, "sweeps resize the dataset and need a generated source");

  for (std::uint64_t count : sweep.counts) {
    if (count == 0) fail(ErrorCode::ConfigError, "sweep counts must be >= 1");
    const BenchmarkParams p = sweep_point(base, sweep, count);
    p.validate();
    if (p.blocks < p.partitions())
      fail(ErrorCode::ConfigError, std::to_string(p.blocks) + " blocks cannot fill " +
                                       std::to_string(p.partitions()) + " partitions at count " +
                                       std::to_string(count));
  }

  std::vector<RunRecord> records;
  for (std::uint64_t count : sweep.counts) {
    const BenchmarkParams p = sweep_point(base, sweep, count);
    for (std::uint64_t rep = 0; rep < sweep.reps; ++rep) {
      RunRecord rec = run_pipeline(p, options, rep);
      rec.scaling = sweep.scaling;
      spdlog::info("{} sweep count={} rep={} blocks={} total={:.4f}s", to_string(sweep.scaling), count,
                   rep, p.blocks, rec.timings.total_s);
      if (on_record) on_record(rec);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::uint64_t write_block_files(const BenchmarkParams& params, const std::filesystem::path& dir,
                                std::uint32_t record_bytes) {
  params.validate();
  const RecordCodec codec(record_bytes);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IOError, "cannot create '" + dir.string() + "': " + ec.message());
  for (std::uint64_t id = 0; id < params.blocks; ++id) {
    const Block block = generate_block(params.seed, id, params.vectors_per_block());
    write_file_bytes(dir / block_file_name(id), encode_block(block, codec));
  }
  return params.blocks;
}

}  // namespace scalemap::bench
