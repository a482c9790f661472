#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "scalemap/net/socket.hpp"

namespace scalemap::netprobe {

inline constexpr std::size_t kPingBytes = 16;
inline constexpr std::uint64_t kDefaultConcurrency = 512;

struct ProbeReport {
  std::string kind = "connections";  // or "throughput"
  std::uint64_t connections_requested = 0;
  std::uint64_t connections_established = 0;
  std::uint64_t failures = 0;
  double setup_total_s = 0.0;
  std::vector<double> response_times_ms;
  double max_response_ms = 0.0;
  double mean_response_ms = 0.0;
  // Throughput mode.
  std::uint64_t payload_bytes = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_acked = 0;
  double elapsed_s = 0.0;
  double throughput_bytes_per_s = 0.0;

  friend bool operator==(const ProbeReport&, const ProbeReport&) = default;
};

std::string to_json(const ProbeReport& report);
ProbeReport parse_probe_report(std::string_view json);

// Server-side, deterministic fault injection.
struct FaultPolicy {
  // Close every Nth accepted connection (1-based ordinal) without answering; 0 = never.
  std::uint64_t reject_every = 0;
  // Hold each PING this long before echoing it.
  std::chrono::milliseconds delay{0};
};

struct ServerStats {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t pings_echoed = 0;
  std::uint64_t bytes_sunk = 0;
};

// Echo/sink endpoint. PING frames are echoed, DATA payloads are counted and an
// ACK frame is answered with the connection's byte total. A SHUTDOWN frame
// from any client stops the server.
class ProbeServer {
 public:
  ProbeServer(const std::string& host, std::uint16_t port, FaultPolicy policy = {});
  ~ProbeServer();

  ProbeServer(const ProbeServer&) = delete;
  ProbeServer& operator=(const ProbeServer&) = delete;

  std::uint16_t port() const noexcept { return listener_.port(); }

  void start();
  void stop();
  // Blocks until a SHUTDOWN frame arrives or stop() is called.
  void wait();
  bool running() const noexcept { return !stopping_; }

  ServerStats stats() const;
  // Ordinals of rejected connections, ascending.
  std::vector<std::uint64_t> rejected_ordinals() const;

 private:
  struct Handler {
    std::jthread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void accept_loop();
  void serve(net::Socket socket);
  void reap_locked();

  FaultPolicy policy_;
  net::Listener listener_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> ordinal_{0};
  std::atomic<std::uint64_t> pings_{0};
  std::atomic<std::uint64_t> bytes_{0};

  // Serializes stop(); it can race between a signal thread and wait().
  std::mutex stop_mu_;
  mutable std::mutex mu_;
  std::vector<std::uint64_t> rejected_;
  std::list<Handler> handlers_;
  std::vector<std::shared_ptr<net::Socket>> open_;
  std::jthread accept_thread_;
};

// Opens k connections with at most `concurrency` in flight; each sends one
// 16-byte PING and waits for the echo. Per-connection failures are counted;
// throws Error(ServerUnreachable) only when every connection fails.
ProbeReport probe_connections(const net::Endpoint& server, std::uint64_t k,
                              std::uint64_t concurrency = kDefaultConcurrency,
                              std::chrono::milliseconds timeout = std::chrono::milliseconds(10000));

// Streams DATA frames of `payload_bytes` for `duration`, then asks for an ACK
// of the byte total. Throws Error(ConfigError) for a zero payload or duration.
ProbeReport probe_throughput(const net::Endpoint& server, std::uint64_t payload_bytes,
                             std::chrono::duration<double> duration);

// Sends a SHUTDOWN frame to a probe server.
void request_shutdown(const net::Endpoint& server);

}  // namespace scalemap::netprobe
