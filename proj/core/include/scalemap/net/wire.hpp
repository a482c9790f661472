#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace scalemap::net {

class Socket;

// Frame tags. 1-6 carry cluster traffic, 7-9 are the probe extension,
// 10-11 carry job submission between a client and the master.
enum class Tag : std::uint8_t {
  Register = 1,
  Task = 2,
  Result = 3,
  Heartbeat = 4,
  Error = 5,
  Shutdown = 6,
  Ping = 7,
  Data = 8,
  Ack = 9,
  Submit = 10,
  JobResult = 11,
};

inline constexpr std::uint8_t kMaxTag = 11;
inline constexpr std::size_t kHeaderBytes = 5;  // u32 BE length + tag
inline constexpr std::uint32_t kMaxFrameLength = 64u << 20;

bool is_known_tag(std::uint8_t tag) noexcept;
std::string_view to_string(Tag tag) noexcept;

struct WireMessage {
  Tag tag = Tag::Ping;
  std::vector<std::byte> payload;

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

// [u32 big-endian length = 1 + payload][u8 tag][payload]
void encode_frame(const WireMessage& msg, std::vector<std::byte>& out);
std::vector<std::byte> encode_frame(const WireMessage& msg);

// Streaming decode from the front of `bytes`. Returns nullopt if more bytes are
// needed. Throws Error(ProtocolError) for zero length, oversize frames or
// unknown tags.
std::optional<WireMessage> try_decode_frame(std::span<const std::byte> bytes,
                                            std::size_t& consumed);

// Exactly one frame spanning all of `bytes`; truncation or trailing bytes throw.
WireMessage decode_frame(std::span<const std::byte> bytes);

void write_message(Socket& socket, const WireMessage& msg);
// nullopt on orderly EOF at a frame boundary.
std::optional<WireMessage> read_message(Socket& socket);

}  // namespace scalemap::net
