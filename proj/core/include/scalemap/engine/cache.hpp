#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "scalemap/core/vec3.hpp"
#include "scalemap/engine/storage.hpp"

namespace scalemap::engine {

using PartitionData = std::shared_ptr<const std::vector<Vec3>>;

struct PartitionKey {
  std::uint64_t dataset = 0;
  std::uint64_t partition = 0;
  friend bool operator==(const PartitionKey&, const PartitionKey&) = default;
};

struct PartitionKeyHash {
  std::size_t operator()(const PartitionKey& k) const noexcept {
    return std::hash<std::uint64_t>{}(k.dataset * 0x9E3779B97F4A7C15ULL ^ k.partition);
  }
};

inline std::uint64_t payload_bytes(const std::vector<Vec3>& v) noexcept {
  return v.size() * sizeof(Vec3);
}

enum class HitSource { Miss, Memory, Disk };

struct CacheLookup {
  PartitionData data;
  HitSource from = HitSource::Miss;
};

// What a store() did, so actions can attribute spills to themselves.
struct StoreOutcome {
  std::uint64_t spill_writes = 0;
  std::uint64_t evictions = 0;
  bool resident = false;
};

struct CacheStats {
  std::uint64_t resident_bytes = 0;
  std::uint64_t peak_resident_bytes = 0;
  std::uint64_t resident_partitions = 0;
  std::uint64_t spill_writes = 0;
  std::uint64_t disk_reloads = 0;
  std::uint64_t corrupt_spills = 0;
  std::uint64_t evictions = 0;
};

// Single authority over resident partitions and spill files.
//
// Resident bytes never exceed the budget. Eviction is strict LRU on access
// order. Spill files live at <spill_dir>/<dataset-id>/<partition>.bin and hold
// the 24-byte record encoding followed by an 8-byte little-endian FNV-1a
// checksum of those records.
class CacheManager {
 public:
  CacheManager(std::uint64_t memory_budget_bytes, std::filesystem::path spill_dir);
  ~CacheManager();

  CacheManager(const CacheManager&) = delete;
  CacheManager& operator=(const CacheManager&) = delete;

  std::uint64_t budget() const noexcept { return budget_; }
  const std::filesystem::path& spill_dir() const noexcept { return spill_dir_; }

  // Throws Error(SpillIOFailure) when a required disk write fails.
  StoreOutcome store(const PartitionKey& key, PartitionData data, StorageLevel level);

  // Memory first, then (if the level allows disk) the spill file. A disk hit
  // under MemoryAndDisk is promoted back into memory when it fits.
  CacheLookup lookup(const PartitionKey& key, StorageLevel level, StoreOutcome* promote = nullptr);

  bool resident(const PartitionKey& key) const;
  bool on_disk(const PartitionKey& key) const;

  void drop(const PartitionKey& key);
  void drop_dataset(std::uint64_t dataset);

  std::filesystem::path spill_path(const PartitionKey& key) const;

  CacheStats stats() const;

 private:
  struct Entry {
    PartitionKey key;
    PartitionData data;
    std::uint64_t bytes = 0;
    StorageLevel level = StorageLevel::MemoryOnly;
  };
  using LruList = std::list<Entry>;

  bool insert_resident_locked(const PartitionKey& key, PartitionData data, StorageLevel level,
                              StoreOutcome& outcome);
  void write_spill_locked(const PartitionKey& key, const std::vector<Vec3>& data);
  PartitionData read_spill_locked(const PartitionKey& key);
  void erase_resident_locked(LruList::iterator it);

  const std::uint64_t budget_;
  const std::filesystem::path spill_dir_;

  mutable std::mutex mu_;
  LruList lru_;  // front = most recently used
  std::unordered_map<PartitionKey, LruList::iterator, PartitionKeyHash> index_;
  std::unordered_set<PartitionKey, PartitionKeyHash> disk_;
  std::uint64_t resident_bytes_ = 0;
  CacheStats stats_;
};

}  // namespace scalemap::engine
