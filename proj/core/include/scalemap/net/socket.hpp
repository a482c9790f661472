#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace scalemap::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // "host:port"; throws Error(ConfigError) when malformed.
  static Endpoint parse(const std::string& text);
  std::string to_string() const;
};

// Owning TCP socket. Move-only.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  ~Socket();

  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  // Throws Error(ConnectFailure).
  static Socket connect(const Endpoint& to, std::chrono::milliseconds timeout);

  bool valid() const noexcept { return fd_ >= 0; }
  int fd() const noexcept { return fd_; }
  int release() noexcept;
  void close() noexcept;
  // Wakes any thread blocked on this socket without releasing the descriptor.
  void shutdown() noexcept;

  // Throws Error(IOError) on failure.
  void send_all(std::span<const std::byte> bytes);
  // False on orderly EOF before the first byte; throws Error(IOError) on
  // errors, timeouts or EOF part-way through.
  bool recv_exact(std::span<std::byte> out);
  // Bytes read, 0 on EOF; throws Error(IOError).
  std::size_t recv_some(std::span<std::byte> out);

  void set_recv_timeout(std::chrono::milliseconds timeout);
  void set_send_timeout(std::chrono::milliseconds timeout);
  void set_nodelay(bool on);

 private:
  int fd_ = -1;
};

class Listener {
 public:
  Listener() = default;
  ~Listener();
  Listener(Listener&& other) noexcept;
  Listener& operator=(Listener&& other) noexcept;
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  // Port 0 picks an ephemeral port. Throws Error(BindFailure).
  static Listener bind(const std::string& host, std::uint16_t port, int backlog = 1024);

  std::uint16_t port() const noexcept { return port_; }
  bool valid() const noexcept { return fd_ >= 0; }

  // Waits up to `timeout`; nullopt on timeout or after close().
  std::optional<Socket> accept_for(std::chrono::milliseconds timeout);
  void close() noexcept;

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Process-wide: writes to a closed peer must surface as errors, not SIGPIPE.
void ignore_sigpipe();

}  // namespace scalemap::net
