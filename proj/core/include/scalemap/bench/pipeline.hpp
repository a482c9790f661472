#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "scalemap/bench/record.hpp"
#include "scalemap/cluster/config.hpp"
#include "scalemap/engine/storage.hpp"
#include "scalemap/net/socket.hpp"

namespace scalemap::bench {

struct PipelineOptions {
  RunMode mode = RunMode::Local;
  engine::StorageLevel storage = engine::StorageLevel::MemoryOnly;
  std::uint64_t memory_budget_bytes = 0;
  std::filesystem::path scratch_dir = std::filesystem::temp_directory_path();
  // Local execution slots; 0 means nodes * cores.
  std::uint32_t slots = 0;
  // Time creation and the map only, as the Python variant of the benchmark does.
  bool skip_reduce = false;
  // Cluster mode only.
  net::Endpoint master;
  std::chrono::milliseconds network_timeout{cluster::kDefaultNetworkTimeoutMs};
};

// create: source + persist + force; map: shift + persist + force; reduce: average.
RunRecord run_pipeline(const BenchmarkParams& params, const PipelineOptions& options,
                       std::uint64_t rep = 0);

enum class SweepAxis { Nodes, Cores };

struct SweepSpec {
  std::vector<std::uint64_t> counts;  // ascending
  Scaling scaling = Scaling::Strong;
  SweepAxis axis = SweepAxis::Nodes;
  std::uint64_t reps = 3;
};

// Strong: base.blocks is the fixed total. Weak: base.blocks is per unit of the
// sweep axis, so total = base.blocks * count. Throws Error(ConfigError) for an
// empty or unsorted count list or when a configuration would leave a
// partition without blocks.
std::vector<RunRecord> run_sweep(const BenchmarkParams& base, const SweepSpec& sweep,
                                 const PipelineOptions& options,
                                 const std::function<void(const RunRecord&)>& on_record = {});

// Parameters of one sweep configuration, before running it.
BenchmarkParams sweep_point(const BenchmarkParams& base, const SweepSpec& sweep, std::uint64_t count);

// Writes each block of a generated dataset as its own file in `dir`.
// Returns the number of files written.
std::uint64_t write_block_files(const BenchmarkParams& params, const std::filesystem::path& dir,
                                std::uint32_t record_bytes);

}  // namespace scalemap::bench
