#include "scalemap/core/codec.hpp"

#include <cstdio>
#include <fstream>

#include "scalemap/core/endian.hpp"
#include "scalemap/error.hpp"

namespace scalemap {

RecordCodec::RecordCodec(std::uint32_t record_bytes) : record_bytes_(record_bytes) {
  if (record_bytes != 12 && record_bytes != 24)
    fail(ErrorCode::InvalidParams,
         "record width must be 12 or 24 bytes, got " + std::to_string(record_bytes));
}

void RecordCodec::encode(std::span<const Vec3> vectors, std::vector<std::byte>& out) const {
  out.reserve(out.size() + vectors.size() * record_bytes_);
  for (const Vec3& v : vectors) {
    if (record_bytes_ == 24) {
      endian::put_le(out, v.x);
      endian::put_le(out, v.y);
      endian::put_le(out, v.z);
    } else {
      endian::put_le(out, static_cast<float>(v.x));
      endian::put_le(out, static_cast<float>(v.y));
      endian::put_le(out, static_cast<float>(v.z));
    }
  }
}

void RecordCodec::decode(std::span<const std::byte> bytes, std::vector<Vec3>& out) const {
  if (bytes.size() % record_bytes_ != 0)
    fail(ErrorCode::IndivisibleLength, "IndivisibleLength(" + std::to_string(bytes.size()) + ", " +
                                           std::to_string(record_bytes_) + ")");
  const std::size_t n = bytes.size() / record_bytes_;
  out.reserve(out.size() + n);
  const std::byte* p = bytes.data();
  for (std::size_t i = 0; i < n; ++i, p += record_bytes_) {
    if (record_bytes_ == 24) {
      out.push_back({endian::get_le<double>(p), endian::get_le<double>(p + 8),
                     endian::get_le<double>(p + 16)});
    } else {
      out.push_back({endian::get_le<float>(p), endian::get_le<float>(p + 4),
                     endian::get_le<float>(p + 8)});
    }
  }
}

std::vector<std::byte> encode_block(const Block& block, const RecordCodec& codec) {
  std::vector<std::byte> out;
  codec.encode(block.vectors, out);
  return out;
}

Block decode_block(std::span<const std::byte> bytes, const RecordCodec& codec,
                   std::uint64_t block_id) {
  Block block{block_id, {}};
  codec.decode(bytes, block.vectors);
  return block;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) fail(ErrorCode::IOError, "cannot open '" + path.string() + "' for reading");
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::byte> bytes(size);
  in.seekg(0);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
    fail(ErrorCode::IOError, "short read on '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IOError, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail(ErrorCode::IOError, "write failed on '" + path.string() + "'");
}

std::filesystem::path block_file_name(std::uint64_t block_id) {
  char name[32];
  std::snprintf(name, sizeof(name), "block-%08llu.bin", static_cast<unsigned long long>(block_id));
  return name;
}

}  // namespace scalemap
