#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>

#include "scalemap/cluster/config.hpp"
#include "scalemap/cluster/messages.hpp"
#include "scalemap/engine/context.hpp"
#include "scalemap/net/socket.hpp"

namespace scalemap::cluster {

struct WorkerStats {
  std::uint64_t tasks_executed = 0;
  std::uint64_t task_errors = 0;
  std::uint64_t protocol_errors = 0;
  std::uint64_t max_concurrent_tasks = 0;
  std::uint64_t heartbeats_sent = 0;
};

// Registers with the master and executes tasks on `slots` local slot threads.
// Results go back through a single writer.
class Worker {
 public:
  explicit Worker(ClusterConfig config, std::string name = {});
  ~Worker();

  Worker(const Worker&) = delete;
  Worker& operator=(const Worker&) = delete;

  // Blocks until SHUTDOWN, stop(), kill() or loss of the master.
  // Throws Error(ConnectFailure) if registration fails after all retries.
  void run();

  void stop();
  // Drops the connection and discards in-flight results, as a crashed process would.
  void kill();

  bool registered() const noexcept { return registered_; }
  std::uint32_t worker_id() const noexcept { return worker_id_; }
  WorkerStats stats() const;

 private:
  void connect_and_register();
  void slot_loop();
  void heartbeat_loop(std::stop_token stop);
  void send(const net::WireMessage& msg);
  void execute(const TaskDescriptor& task);

  ClusterConfig config_;
  std::string name_;
  engine::Context engine_;
  net::Socket socket_;
  std::mutex send_mu_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<TaskDescriptor> queue_;
  bool draining_ = false;

  std::atomic<bool> registered_{false};
  std::atomic<bool> stopped_{false};
  std::atomic<bool> killed_{false};
  std::atomic<std::uint32_t> worker_id_{0};
  std::atomic<std::uint64_t> heartbeat_interval_ms_{0};
  std::atomic<std::uint64_t> active_{0};

  std::atomic<std::uint64_t> tasks_executed_{0};
  std::atomic<std::uint64_t> task_errors_{0};
  std::atomic<std::uint64_t> protocol_errors_{0};
  std::atomic<std::uint64_t> max_concurrent_{0};
  std::atomic<std::uint64_t> heartbeats_sent_{0};
};

}  // namespace scalemap::cluster
