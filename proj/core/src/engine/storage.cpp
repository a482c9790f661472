#include "scalemap/engine/storage.hpp"

#include <string>

#include "scalemap/error.hpp"

namespace scalemap::engine {

std::string_view to_string(StorageLevel level) noexcept {
  switch (level) {
    case StorageLevel::None: return "none";
    case StorageLevel::MemoryOnly: return "memory";
    case StorageLevel::DiskOnly: return "disk";
    case StorageLevel::MemoryAndDisk: return "memory_and_disk";
  }
  return "none";
}

StorageLevel parse_storage_level(std::string_view text) {
  if (text == "none") return StorageLevel::None;
  if (text == "memory" || text == "MEMORY_ONLY") return StorageLevel::MemoryOnly;
  if (text == "disk" || text == "DISK_ONLY") return StorageLevel::DiskOnly;
  if (text == "memory_and_disk" || text == "MEMORY_AND_DISK") return StorageLevel::MemoryAndDisk;
  fail(ErrorCode::ConfigError, "unknown storage level '" + std::string(text) + "'");
}

}  // namespace scalemap::engine
