#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "scalemap/engine/context.hpp"
#include "scalemap/engine/storage.hpp"
#include "scalemap/net/socket.hpp"

namespace scalemap::cluster {

// Period of the master's liveness sweep; timeouts fire within one quantum.
inline constexpr std::chrono::milliseconds kSchedulingQuantum{50};

inline constexpr std::uint64_t kDefaultNetworkTimeoutMs = 120000;

struct ClusterConfig {
  // Master binds here; workers and clients connect here.
  std::string bind_host = "0.0.0.0";
  net::Endpoint master{"127.0.0.1", 7077};
  std::uint32_t expected_workers = 1;
  // 0 disables HEARTBEAT traffic entirely.
  std::uint64_t heartbeat_interval_ms = 0;
  std::uint64_t network_timeout_ms = kDefaultNetworkTimeoutMs;
  std::uint32_t slots = 1;
  // Extra registration attempts after a failed connect.
  std::uint32_t registration_retries = 1;
  std::chrono::milliseconds retry_delay{200};

  // Worker-side execution settings.
  engine::EngineConfig engine;
  engine::StorageLevel storage = engine::StorageLevel::MemoryOnly;
};

}  // namespace scalemap::cluster
