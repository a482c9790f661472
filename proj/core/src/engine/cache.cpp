#include "scalemap/engine/cache.hpp"

#include <algorithm>
#include <fstream>
#include <string>
#include <system_error>

#include "scalemap/core/codec.hpp"
#include "scalemap/core/endian.hpp"
#include "scalemap/core/fnv.hpp"
#include "scalemap/error.hpp"

namespace scalemap::engine {

namespace fs = std::filesystem;

CacheManager::CacheManager(std::uint64_t memory_budget_bytes, fs::path spill_dir)
    : budget_(memory_budget_bytes), spill_dir_(std::move(spill_dir)) {}

CacheManager::~CacheManager() {
  std::error_code ec;
  fs::remove_all(spill_dir_, ec);
}

fs::path CacheManager::spill_path(const PartitionKey& key) const {
  return spill_dir_ / std::to_string(key.dataset) / (std::to_string(key.partition) + ".bin");
}

StoreOutcome CacheManager::store(const PartitionKey& key, PartitionData data, StorageLevel level) {
  StoreOutcome outcome;
  if (level == StorageLevel::None || !data) return outcome;

  std::lock_guard lock(mu_);
  if (level == StorageLevel::DiskOnly) {
    if (!disk_.contains(key)) {
      write_spill_locked(key, *data);
      ++outcome.spill_writes;
    }
    return outcome;
  }

  if (auto it = index_.find(key); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    outcome.resident = true;
    return outcome;
  }
  if (insert_resident_locked(key, data, level, outcome)) {
    outcome.resident = true;
  } else if (level == StorageLevel::MemoryAndDisk && !disk_.contains(key)) {
    write_spill_locked(key, *data);
    ++outcome.spill_writes;
  }
  return outcome;
}

bool CacheManager::insert_resident_locked(const PartitionKey& key, PartitionData data,
                                          StorageLevel level, StoreOutcome& outcome) {
  const std::uint64_t bytes = payload_bytes(*data);
  if (bytes > budget_) return false;
  while (resident_bytes_ + bytes > budget_) {
    auto victim = std::prev(lru_.end());
    if (victim->level == StorageLevel::MemoryAndDisk && !disk_.contains(victim->key)) {
      write_spill_locked(victim->key, *victim->data);
      ++outcome.spill_writes;
    }
    ++outcome.evictions;
    ++stats_.evictions;
    erase_resident_locked(victim);
  }
  lru_.push_front(Entry{key, std::move(data), bytes, level});
  index_[key] = lru_.begin();
  resident_bytes_ += bytes;
  stats_.peak_resident_bytes = std::max(stats_.peak_resident_bytes, resident_bytes_);
  return true;
}

void CacheManager::erase_resident_locked(LruList::iterator it) {
  resident_bytes_ -= it->bytes;
  index_.erase(it->key);
  lru_.erase(it);
}

CacheLookup CacheManager::lookup(const PartitionKey& key, StorageLevel level,
                                 StoreOutcome* promote) {
  std::lock_guard lock(mu_);
  if (auto it = index_.find(key); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return {it->second->data, HitSource::Memory};
  }
  if (!uses_disk(level) || !disk_.contains(key)) return {};

  PartitionData data = read_spill_locked(key);
  if (!data) return {};
  ++stats_.disk_reloads;
  if (level == StorageLevel::MemoryAndDisk) {
    StoreOutcome local;
    insert_resident_locked(key, data, level, promote ? *promote : local);
  }
  return {std::move(data), HitSource::Disk};
}

bool CacheManager::resident(const PartitionKey& key) const {
  std::lock_guard lock(mu_);
  return index_.contains(key);
}

bool CacheManager::on_disk(const PartitionKey& key) const {
  std::lock_guard lock(mu_);
  return disk_.contains(key);
}

void CacheManager::drop(const PartitionKey& key) {
  std::lock_guard lock(mu_);
  if (auto it = index_.find(key); it != index_.end()) erase_resident_locked(it->second);
  if (disk_.erase(key) > 0) {
    std::error_code ec;
    fs::remove(spill_path(key), ec);
  }
}

void CacheManager::drop_dataset(std::uint64_t dataset) {
  std::lock_guard lock(mu_);
  for (auto it = lru_.begin(); it != lru_.end();) {
    auto next = std::next(it);
    if (it->key.dataset == dataset) erase_resident_locked(it);
    it = next;
  }
  std::erase_if(disk_, [&](const PartitionKey& k) { return k.dataset == dataset; });
  std::error_code ec;
  fs::remove_all(spill_dir_ / std::to_string(dataset), ec);
}

void CacheManager::write_spill_locked(const PartitionKey& key, const std::vector<Vec3>& data) {
  const fs::path path = spill_path(key);
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec)
    fail(ErrorCode::SpillIOFailure,
         "cannot create spill directory '" + path.parent_path().string() + "': " + ec.message());

  std::vector<std::byte> bytes;
  RecordCodec(24).encode(data, bytes);
  const std::uint64_t checksum = fnv1a64(bytes);
  endian::put_le(bytes, checksum);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (out) out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail(ErrorCode::SpillIOFailure, "spill write failed for '" + path.string() + "'");
  disk_.insert(key);
  ++stats_.spill_writes;
}

PartitionData CacheManager::read_spill_locked(const PartitionKey& key) {
  const fs::path path = spill_path(key);
  std::vector<std::byte> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error&) {
    disk_.erase(key);
    return nullptr;
  }
  auto corrupt = [&]() -> PartitionData {
    ++stats_.corrupt_spills;
    disk_.erase(key);
    std::error_code ec;
    fs::remove(path, ec);
    return nullptr;
  };
  if (bytes.size() < 8 || (bytes.size() - 8) % 24 != 0) return corrupt();
  const std::span<const std::byte> records(bytes.data(), bytes.size() - 8);
  if (fnv1a64(records) != endian::get_le<std::uint64_t>(bytes.data() + records.size()))
    return corrupt();

  auto data = std::make_shared<std::vector<Vec3>>();
  RecordCodec(24).decode(records, *data);
  return data;
}

CacheStats CacheManager::stats() const {
  std::lock_guard lock(mu_);
  CacheStats s = stats_;
  s.resident_bytes = resident_bytes_;
  s.resident_partitions = index_.size();
  return s;
}

}  // namespace scalemap::engine
