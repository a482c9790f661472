#include "scalemap/engine/context.hpp"

#include <algorithm>
#include <cstring>
#include <unistd.h>

#include "scalemap/core/codec.hpp"
#include "scalemap/core/generate.hpp"
#include "scalemap/core/partition.hpp"
#include "scalemap/engine/parallel.hpp"
#include "scalemap/error.hpp"

namespace scalemap::engine {

namespace fs = std::filesystem;

struct DatasetNode {
  std::uint64_t id = 0;
  std::uint64_t partitions = 0;
  std::shared_ptr<DatasetNode> parent;  // null for sources
  Vec3 delta;
  BenchmarkParams params;       // sources only
  std::vector<fs::path> files;  // LoadBinary sources only
  std::atomic<StorageLevel> storage{StorageLevel::None};
};

std::uint64_t Dataset::id() const { return node_->id; }
std::uint64_t Dataset::partitions() const { return node_->partitions; }
StorageLevel Dataset::storage() const { return node_->storage.load(); }
bool Dataset::is_source() const { return node_->parent == nullptr; }
Dataset Dataset::parent() const { return Dataset(node_->parent); }
Vec3 Dataset::delta() const { return node_->delta; }

const BenchmarkParams& Dataset::source_params() const {
  const DatasetNode* n = node_.get();
  while (n->parent) n = n->parent.get();
  return n->params;
}

Vec3 average_of(std::span<const PartialSum> partials) {
  Vec3 total;
  std::uint64_t count = 0;
  for (const PartialSum& s : partials) {
    total += s.sum;
    count += s.count;
  }
  if (count == 0) fail(ErrorCode::EmptyDataset, "cannot average an empty dataset");
  const auto n = static_cast<double>(count);
  return {total.x / n, total.y / n, total.z / n};
}

struct Context::ActionStats {
  std::atomic<std::uint64_t> recomputed{0};
  std::atomic<std::uint64_t> spill_writes{0};
};

namespace {

fs::path make_session_dir(const fs::path& scratch) {
  static std::atomic<std::uint64_t> counter{0};
  return scratch / ("scalemap-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
}

std::vector<fs::path> list_block_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    fail(ErrorCode::InvalidParams, "load directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Context::Context(EngineConfig config)
    : config_(std::move(config)),
      session_dir_(make_session_dir(config_.scratch_dir)),
      cache_(std::make_unique<CacheManager>(config_.memory_budget_bytes, session_dir_)) {
  if (config_.slots == 0) config_.slots = 1;
}

Context::~Context() = default;

Dataset Context::source(const BenchmarkParams& params) {
  BenchmarkParams p = params;
  std::vector<fs::path> files;
  if (p.source == SourceKind::LoadBinary) {
    if (p.load_dir.empty()) fail(ErrorCode::InvalidParams, "load source requires a directory");
    files = list_block_files(p.load_dir);
    if (files.empty())
      fail(ErrorCode::InvalidParams, "load directory '" + p.load_dir.string() + "' has no files");
    p.blocks = files.size();
  }
  p.validate();

  auto node = std::make_shared<DatasetNode>();
  node->id = next_id_++;
  node->partitions = p.partitions();
  node->params = std::move(p);
  node->files = std::move(files);
  return Dataset(std::move(node));
}

Dataset Context::map_shift(const Dataset& parent, const Vec3& delta) {
  auto node = std::make_shared<DatasetNode>();
  node->id = next_id_++;
  node->partitions = parent.node_->partitions;
  node->parent = parent.node_;
  node->delta = delta;
  return Dataset(std::move(node));
}

Dataset Context::persist(const Dataset& d, StorageLevel level) {
  d.node_->storage = level;
  return d;
}

void Context::unpersist(const Dataset& d) {
  d.node_->storage = StorageLevel::None;
  cache_->drop_dataset(d.node_->id);
}

void Context::check_partition(const Dataset& d, std::uint64_t partition) const {
  if (!d) fail(ErrorCode::UnknownPartition, "null dataset");
  if (partition >= d.node_->partitions)
    fail(ErrorCode::UnknownPartition, "partition " + std::to_string(partition) +
                                          " out of range for dataset " +
                                          std::to_string(d.node_->id) + " with " +
                                          std::to_string(d.node_->partitions) + " partitions");
}

PartitionData Context::get_partition(DatasetNode& node, std::uint64_t p, ActionStats& stats) {
  const PartitionKey key{node.id, p};
  const StorageLevel level = node.storage.load();

  auto try_cache = [&]() -> PartitionData {
    if (level == StorageLevel::None) return nullptr;
    StoreOutcome promoted;
    CacheLookup hit = cache_->lookup(key, level, &promoted);
    stats.spill_writes += promoted.spill_writes;
    if (hit.from == HitSource::Memory) ++cache_hits_;
    if (hit.from == HitSource::Disk) {
      ++disk_reloads_;
      payload_bytes_allocated_ += payload_bytes(*hit.data);
    }
    return hit.data;
  };

  if (auto data = try_cache()) return data;

  {
    std::unique_lock lock(inflight_mu_);
    inflight_cv_.wait(lock, [&] { return !inflight_.contains(key); });
    inflight_.insert(key);
  }
  struct Release {
    Context& ctx;
    PartitionKey key;
    ~Release() {
      {
        std::lock_guard lock(ctx.inflight_mu_);
        ctx.inflight_.erase(key);
      }
      ctx.inflight_cv_.notify_all();
    }
  } release{*this, key};

  // Another slot may have produced it while we waited.
  if (auto data = try_cache()) return data;

  PartitionData data = compute_partition(node, p, stats);
  if (level != StorageLevel::None) stats.spill_writes += cache_->store(key, data, level).spill_writes;
  return data;
}

PartitionData Context::compute_partition(DatasetNode& node, std::uint64_t p, ActionStats& stats) {
  const PartitionKey key{node.id, p};
  bool seen_before;
  {
    std::lock_guard lock(inflight_mu_);
    seen_before = materialized_once_.contains(key);
  }

  auto out = std::make_shared<std::vector<Vec3>>();
  if (node.parent) {
    PartitionData parent = get_partition(*node.parent, p, stats);
    out->reserve(parent->size());
    const Vec3 delta = node.delta;
    for (const Vec3& v : *parent) out->push_back(v + delta);
  } else if (node.params.source == SourceKind::Generate) {
    const auto ids = blocks_of_partition(node.params.blocks, node.partitions, p);
    const std::uint64_t per_block = node.params.vectors_per_block();
    out->reserve(ids.size() * per_block);
    for (std::uint64_t id : ids) generate_into(node.params.seed, id, per_block, *out);
    generated_blocks_ += ids.size();
  } else {
    const RecordCodec codec(node.params.record_bytes);
    for (std::uint64_t i : blocks_of_partition(node.files.size(), node.partitions, p)) {
      std::vector<std::byte> bytes;
      try {
        bytes = read_file_bytes(node.files[i]);
      } catch (const Error& e) {
        if (seen_before)
          fail(ErrorCode::RecomputeFailure, "cannot recompute partition " + std::to_string(p) +
                                                " of dataset " + std::to_string(node.id) + ": " +
                                                e.what());
        throw;
      }
      codec.decode(bytes, *out);
      ++loaded_blocks_;
    }
  }

  payload_bytes_allocated_ += payload_bytes(*out);
  ++computed_partitions_;
  if (seen_before) {
    ++stats.recomputed;
    ++recomputed_partitions_;
  } else {
    std::lock_guard lock(inflight_mu_);
    materialized_once_.insert(key);
  }
  return out;
}

MaterializationReport Context::force(const Dataset& d) {
  if (!d) fail(ErrorCode::InvalidParams, "null dataset");
  ActionStats stats;
  std::vector<std::uint64_t> sizes(d.node_->partitions, 0);
  parallel_for(config_.slots, sizes.size(), [&](std::uint64_t p) {
    sizes[p] = payload_bytes(*get_partition(*d.node_, p, stats));
  });
  MaterializationReport report;
  report.partition_count = sizes.size();
  for (auto s : sizes) report.bytes_materialized += s;
  report.recomputed_partitions = stats.recomputed;
  report.spilled_partitions = stats.spill_writes;
  return report;
}

MaterializationReport Context::force_partition(const Dataset& d, std::uint64_t partition) {
  check_partition(d, partition);
  ActionStats stats;
  MaterializationReport report;
  report.partition_count = 1;
  report.bytes_materialized = payload_bytes(*get_partition(*d.node_, partition, stats));
  report.recomputed_partitions = stats.recomputed;
  report.spilled_partitions = stats.spill_writes;
  return report;
}

namespace {

PartialSum sum_records(const std::vector<Vec3>& records) {
  PartialSum s;
  for (const Vec3& v : records) {
    s.sum.x += v.x;
    s.sum.y += v.y;
    s.sum.z += v.z;
  }
  s.count = records.size();
  return s;
}

}  // namespace

PartialSum Context::partial_sum(const Dataset& d, std::uint64_t partition) {
  check_partition(d, partition);
  ActionStats stats;
  return sum_records(*get_partition(*d.node_, partition, stats));
}

std::vector<PartialSum> Context::partial_sums(const Dataset& d) {
  if (!d) fail(ErrorCode::InvalidParams, "null dataset");
  ActionStats stats;
  std::vector<PartialSum> partials(d.node_->partitions);
  parallel_for(config_.slots, partials.size(), [&](std::uint64_t p) {
    partials[p] = sum_records(*get_partition(*d.node_, p, stats));
  });
  return partials;
}

Vec3 Context::reduce_average(const Dataset& d) {
  const auto partials = partial_sums(d);
  return average_of(partials);
}

std::vector<Vec3> Context::collect_partition(const Dataset& d, std::uint64_t partition) {
  check_partition(d, partition);
  ActionStats stats;
  return *get_partition(*d.node_, partition, stats);
}

bool Context::evict_and_recompute_check(const Dataset& d, std::uint64_t partition) {
  check_partition(d, partition);
  {
    std::lock_guard lock(inflight_mu_);
    if (!materialized_once_.contains({d.node_->id, partition}))
      fail(ErrorCode::UnknownPartition, "partition " + std::to_string(partition) + " of dataset " +
                                            std::to_string(d.node_->id) +
                                            " has never been materialized");
  }
  ActionStats stats;
  const PartitionData original = get_partition(*d.node_, partition, stats);

  for (DatasetNode* n = d.node_.get(); n != nullptr; n = n->parent.get())
    cache_->drop({n->id, partition});

  const PartitionData again = get_partition(*d.node_, partition, stats);
  return original->size() == again->size() &&
         (original->empty() ||
          std::memcmp(original->data(), again->data(), payload_bytes(*original)) == 0);
}

LineageSpec Context::lineage_of(const Dataset& d) const {
  LineageSpec spec;
  const DatasetNode* n = d.node_.get();
  for (; n->parent; n = n->parent.get()) spec.shifts.push_back(n->delta);
  std::reverse(spec.shifts.begin(), spec.shifts.end());
  spec.source = n->params;
  return spec;
}

Dataset Context::from_lineage(const LineageSpec& spec, StorageLevel level) {
  Dataset d;
  LineageSpec prefix{spec.source, {}};
  std::lock_guard lock(lineage_mu_);
  for (std::size_t i = 0; i <= spec.shifts.size(); ++i) {
    if (i > 0) prefix.shifts.push_back(spec.shifts[i - 1]);
    auto key = encode_lineage(prefix);
    auto it = by_lineage_.find(key);
    if (it == by_lineage_.end()) {
      Dataset next = i == 0 ? source(spec.source) : map_shift(d, spec.shifts[i - 1]);
      it = by_lineage_.emplace(std::move(key), next).first;
    }
    d = it->second;
  }
  persist(d, level);
  return d;
}

EngineCounters Context::counters() const {
  EngineCounters c;
  c.generated_blocks = generated_blocks_;
  c.loaded_blocks = loaded_blocks_;
  c.computed_partitions = computed_partitions_;
  c.recomputed_partitions = recomputed_partitions_;
  c.cache_hits = cache_hits_;
  c.disk_reloads = disk_reloads_;
  const CacheStats cs = cache_->stats();
  c.spill_writes = cs.spill_writes;
  c.resident_bytes = cs.resident_bytes;
  c.peak_resident_bytes = cs.peak_resident_bytes;
  c.payload_bytes_allocated = payload_bytes_allocated_;
  return c;
}

}  // namespace scalemap::engine
