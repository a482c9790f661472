#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalemap/core/endian.hpp"
#include "scalemap/core/vec3.hpp"
#include "scalemap/error.hpp"

namespace scalemap {

// Little-endian field writer for wire payloads and lineage blobs.
class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::byte>& out) : out_(out) {}

  template <typename T>
  ByteWriter& le(T v) {
    endian::put_le(out_, v);
    return *this;
  }
  ByteWriter& u8(std::uint8_t v) {
    out_.push_back(static_cast<std::byte>(v));
    return *this;
  }
  ByteWriter& vec3(const Vec3& v) { return le(v.x).le(v.y).le(v.z); }
  ByteWriter& str(std::string_view s) {
    le(static_cast<std::uint32_t>(s.size()));
    const auto* p = reinterpret_cast<const std::byte*>(s.data());
    out_.insert(out_.end(), p, p + s.size());
    return *this;
  }
  ByteWriter& raw(std::span<const std::byte> bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
    return *this;
  }

 private:
  std::vector<std::byte>& out_;
};

// Bounds-checked reader; any overrun throws Error(ProtocolError).
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <typename T>
  T le() {
    need(sizeof(T));
    T v = endian::get_le<T>(bytes_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  Vec3 vec3() {
    Vec3 v;
    v.x = le<double>();
    v.y = le<double>();
    v.z = le<double>();
    return v;
  }
  std::string str() {
    const auto n = le<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::byte> raw(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::span<const std::byte> rest() const noexcept { return bytes_.subspan(pos_); }

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool done() const noexcept { return pos_ == bytes_.size(); }

  // Throws unless every byte was consumed.
  void expect_done(std::string_view what) const {
    if (!done())
      fail(ErrorCode::ProtocolError,
           std::string(what) + ": " + std::to_string(remaining()) + " trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      fail(ErrorCode::ProtocolError, "truncated payload: need " + std::to_string(n) +
                                         " bytes at offset " + std::to_string(pos_) + ", have " +
                                         std::to_string(bytes_.size() - pos_));
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace scalemap
