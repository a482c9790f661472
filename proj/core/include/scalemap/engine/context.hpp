#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_set>
#include <vector>

#include "scalemap/core/params.hpp"
#include "scalemap/core/vec3.hpp"
#include "scalemap/engine/cache.hpp"
#include "scalemap/engine/lineage.hpp"
#include "scalemap/engine/storage.hpp"

namespace scalemap::engine {

struct DatasetNode;

// Immutable handle to a lazy dataset. Copies share the same node.
class Dataset {
 public:
  Dataset() = default;

  std::uint64_t id() const;
  std::uint64_t partitions() const;
  StorageLevel storage() const;
  bool is_source() const;
  // Parent of a mapped dataset; empty handle for sources.
  Dataset parent() const;
  Vec3 delta() const;
  const BenchmarkParams& source_params() const;

  explicit operator bool() const noexcept { return node_ != nullptr; }

 private:
  friend class Context;
  explicit Dataset(std::shared_ptr<DatasetNode> node) : node_(std::move(node)) {}
  std::shared_ptr<DatasetNode> node_;
};

struct EngineConfig {
  std::uint32_t slots = 1;
  std::uint64_t memory_budget_bytes = 0;  // required; no implicit default
  std::filesystem::path scratch_dir = std::filesystem::temp_directory_path();
};

struct MaterializationReport {
  std::uint64_t partition_count = 0;
  std::uint64_t bytes_materialized = 0;
  // Partitions rebuilt from lineage after having been materialized before,
  // anywhere in the dataset's lineage, during this action.
  std::uint64_t recomputed_partitions = 0;
  // Spill-file writes performed during this action.
  std::uint64_t spilled_partitions = 0;
};

struct PartialSum {
  Vec3 sum;
  std::uint64_t count = 0;
};

// Combines partials in the order given; callers pass ascending partition order.
Vec3 average_of(std::span<const PartialSum> partials);

struct EngineCounters {
  std::uint64_t generated_blocks = 0;
  std::uint64_t loaded_blocks = 0;
  std::uint64_t computed_partitions = 0;
  std::uint64_t recomputed_partitions = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t disk_reloads = 0;
  std::uint64_t spill_writes = 0;
  std::uint64_t payload_bytes_allocated = 0;
  std::uint64_t resident_bytes = 0;
  std::uint64_t peak_resident_bytes = 0;
};

// Driver-side entry point: builds datasets, runs actions over a pool of
// `slots` execution slots and owns the cache. Actions are thread-safe; a
// given (dataset, partition) is computed by at most one slot at a time.
class Context {
 public:
  explicit Context(EngineConfig config);
  ~Context();

  Context(const Context&) = delete;
  Context& operator=(const Context&) = delete;

  const EngineConfig& config() const noexcept { return config_; }

  // Lazy. Throws Error(InvalidParams) for invalid params or an empty load directory.
  Dataset source(const BenchmarkParams& params);
  Dataset map_shift(const Dataset& parent, const Vec3& delta);

  // Takes effect at the next materialization. Returns `d` for chaining.
  Dataset persist(const Dataset& d, StorageLevel level);
  void unpersist(const Dataset& d);

  MaterializationReport force(const Dataset& d);
  Vec3 reduce_average(const Dataset& d);

  // Single-partition actions, used by cluster workers.
  MaterializationReport force_partition(const Dataset& d, std::uint64_t partition);
  PartialSum partial_sum(const Dataset& d, std::uint64_t partition);
  std::vector<PartialSum> partial_sums(const Dataset& d);

  // Test hook: evicts the partition (and its ancestors' copies) from every
  // storage tier, recomputes it and compares bytes with the prior contents.
  bool evict_and_recompute_check(const Dataset& d, std::uint64_t partition);

  // Copy of a partition's current contents (materializing it if needed).
  std::vector<Vec3> collect_partition(const Dataset& d, std::uint64_t partition);

  LineageSpec lineage_of(const Dataset& d) const;
  // Memoized per distinct lineage so repeated tasks hit the same cache entries.
  Dataset from_lineage(const LineageSpec& spec, StorageLevel level);

  EngineCounters counters() const;
  CacheManager& cache() noexcept { return *cache_; }

 private:
  struct ActionStats;

  PartitionData get_partition(DatasetNode& node, std::uint64_t p, ActionStats& stats);
  PartitionData compute_partition(DatasetNode& node, std::uint64_t p, ActionStats& stats);
  void check_partition(const Dataset& d, std::uint64_t partition) const;

  EngineConfig config_;
  std::filesystem::path session_dir_;
  std::unique_ptr<CacheManager> cache_;
  std::atomic<std::uint64_t> next_id_{1};

  std::mutex inflight_mu_;
  std::condition_variable inflight_cv_;
  std::unordered_set<PartitionKey, PartitionKeyHash> inflight_;
  std::unordered_set<PartitionKey, PartitionKeyHash> materialized_once_;

  std::mutex lineage_mu_;
  std::map<std::vector<std::byte>, Dataset> by_lineage_;

  std::atomic<std::uint64_t> generated_blocks_{0};
  std::atomic<std::uint64_t> loaded_blocks_{0};
  std::atomic<std::uint64_t> computed_partitions_{0};
  std::atomic<std::uint64_t> recomputed_partitions_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
  std::atomic<std::uint64_t> disk_reloads_{0};
  std::atomic<std::uint64_t> payload_bytes_allocated_{0};
};

}  // namespace scalemap::engine
