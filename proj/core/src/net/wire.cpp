#include "scalemap/net/wire.hpp"

#include <array>
#include <string>

#include "scalemap/core/endian.hpp"
#include "scalemap/error.hpp"
#include "scalemap/net/socket.hpp"

namespace scalemap::net {

bool is_known_tag(std::uint8_t tag) noexcept { return tag >= 1 && tag <= kMaxTag; }

std::string_view to_string(Tag tag) noexcept {
  switch (tag) {
    case Tag::Register: return "REGISTER";
    case Tag::Task: return "TASK";
    case Tag::Result: return "RESULT";
    case Tag::Heartbeat: return "HEARTBEAT";
    case Tag::Error: return "ERROR";
    case Tag::Shutdown: return "SHUTDOWN";
    case Tag::Ping: return "PING";
    case Tag::Data: return "DATA";
    case Tag::Ack: return "ACK";
    case Tag::Submit: return "SUBMIT";
    case Tag::JobResult: return "JOB_RESULT";
  }
  return "UNKNOWN";
}

void encode_frame(const WireMessage& msg, std::vector<std::byte>& out) {
  if (msg.payload.size() + 1 > kMaxFrameLength)
    fail(ErrorCode::ProtocolError, "payload of " + std::to_string(msg.payload.size()) +
                                       " bytes exceeds frame limit");
  out.reserve(out.size() + kHeaderBytes + msg.payload.size());
  endian::put_be(out, static_cast<std::uint32_t>(msg.payload.size() + 1));
  out.push_back(static_cast<std::byte>(msg.tag));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
}

std::vector<std::byte> encode_frame(const WireMessage& msg) {
  std::vector<std::byte> out;
  encode_frame(msg, out);
  return out;
}

namespace {

std::uint32_t checked_length(const std::byte* header) {
  const auto length = endian::get_be<std::uint32_t>(header);
  if (length == 0) fail(ErrorCode::ProtocolError, "frame length 0 (missing tag)");
  if (length > kMaxFrameLength)
    fail(ErrorCode::ProtocolError, "frame length " + std::to_string(length) + " exceeds limit");
  const auto tag = static_cast<std::uint8_t>(header[4]);
  if (!is_known_tag(tag)) fail(ErrorCode::ProtocolError, "unknown tag " + std::to_string(tag));
  return length;
}

}  // namespace

std::optional<WireMessage> try_decode_frame(std::span<const std::byte> bytes,
                                            std::size_t& consumed) {
  consumed = 0;
  if (bytes.size() < kHeaderBytes) return std::nullopt;
  const std::uint32_t length = checked_length(bytes.data());
  const std::size_t total = 4 + static_cast<std::size_t>(length);
  if (bytes.size() < total) return std::nullopt;
  WireMessage msg;
  msg.tag = static_cast<Tag>(bytes[4]);
  msg.payload.assign(bytes.begin() + kHeaderBytes, bytes.begin() + static_cast<std::ptrdiff_t>(total));
  consumed = total;
  return msg;
}

WireMessage decode_frame(std::span<const std::byte> bytes) {
  std::size_t consumed = 0;
  auto msg = try_decode_frame(bytes, consumed);
  if (!msg)
    fail(ErrorCode::ProtocolError, "truncated frame: " + std::to_string(bytes.size()) + " bytes");
  if (consumed != bytes.size())
    fail(ErrorCode::ProtocolError, std::to_string(bytes.size() - consumed) + " bytes after frame");
  return std::move(*msg);
}

void write_message(Socket& socket, const WireMessage& msg) {
  socket.send_all(encode_frame(msg));
}

std::optional<WireMessage> read_message(Socket& socket) {
  std::array<std::byte, kHeaderBytes> header{};
  if (!socket.recv_exact(header)) return std::nullopt;
  const std::uint32_t length = checked_length(header.data());
  WireMessage msg;
  msg.tag = static_cast<Tag>(header[4]);
  msg.payload.resize(length - 1);
  if (!msg.payload.empty() && !socket.recv_exact(msg.payload))
    fail(ErrorCode::IOError, "connection closed mid-frame");
  return msg;
}

}  // namespace scalemap::net
