#pragma once

#include <string_view>

namespace scalemap::engine {

enum class StorageLevel { None, MemoryOnly, DiskOnly, MemoryAndDisk };

std::string_view to_string(StorageLevel level) noexcept;
StorageLevel parse_storage_level(std::string_view text);

constexpr bool uses_memory(StorageLevel l) noexcept {
  return l == StorageLevel::MemoryOnly || l == StorageLevel::MemoryAndDisk;
}
constexpr bool uses_disk(StorageLevel l) noexcept {
  return l == StorageLevel::DiskOnly || l == StorageLevel::MemoryAndDisk;
}

}  // namespace scalemap::engine
