#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "scalemap/core/vec3.hpp"

namespace scalemap {

// Headerless little-endian record layout: three float32 (12 bytes) or three
// float64 (24 bytes) per record. The width travels out of band.
class RecordCodec {
 public:
  explicit RecordCodec(std::uint32_t record_bytes = 24);

  std::uint32_t record_bytes() const noexcept { return record_bytes_; }

  void encode(std::span<const Vec3> vectors, std::vector<std::byte>& out) const;
  void decode(std::span<const std::byte> bytes, std::vector<Vec3>& out) const;

 private:
  std::uint32_t record_bytes_;
};

std::vector<std::byte> encode_block(const Block& block, const RecordCodec& codec);

// Throws Error(IndivisibleLength) when the length is not a whole number of records.
Block decode_block(std::span<const std::byte> bytes, const RecordCodec& codec,
                   std::uint64_t block_id = 0);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

// Block files written by the generator use this name so lexical order is id order.
std::filesystem::path block_file_name(std::uint64_t block_id);

}  // namespace scalemap
