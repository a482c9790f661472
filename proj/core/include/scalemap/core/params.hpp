#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "scalemap/core/vec3.hpp"

namespace scalemap {

inline constexpr std::uint64_t kDefaultVectorsPerUnit = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kDeskVectorsPerUnit = std::uint64_t{1} << 12;

enum class SourceKind { Generate, LoadBinary };

std::string_view to_string(SourceKind kind) noexcept;
SourceKind parse_source_kind(std::string_view text);

// Everything that defines one benchmark configuration.
//
// partitions() = nodes * cores * nparts. blocks, block_size_units and nparts
// are independent knobs; any of them can be pushed up to force spilling.
struct BenchmarkParams {
  std::uint64_t blocks = 1;
  std::uint64_t block_size_units = 1;
  std::uint64_t vectors_per_unit = kDefaultVectorsPerUnit;
  std::uint64_t nodes = 1;
  std::uint64_t cores = 1;
  std::uint64_t nparts = 1;
  std::uint64_t seed = 0;
  SourceKind source = SourceKind::Generate;
  std::filesystem::path load_dir;  // LoadBinary only
  std::uint32_t record_bytes = 24;  // LoadBinary only: 12 or 24
  Vec3 shift_delta{0.5, 0.5, 0.5};

  std::uint64_t partitions() const noexcept { return nodes * cores * nparts; }
  std::uint64_t vectors_per_block() const noexcept { return block_size_units * vectors_per_unit; }
  std::uint64_t total_vectors() const noexcept { return blocks * vectors_per_block(); }
  // Payload size in memory (float64 records), independent of the on-disk width.
  std::uint64_t total_bytes() const noexcept { return total_vectors() * sizeof(Vec3); }

  // Throws Error(InvalidParams) on zero counts or an unsupported record width.
  void validate() const;

  friend bool operator==(const BenchmarkParams&, const BenchmarkParams&) = default;
};

}  // namespace scalemap
