#pragma once

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "scalemap/cluster/config.hpp"
#include "scalemap/cluster/messages.hpp"
#include "scalemap/net/socket.hpp"

namespace scalemap::cluster {

struct WorkerInfo {
  std::uint32_t id = 0;
  std::int32_t pid = 0;
  std::string name;
  std::uint32_t slots = 0;
  bool alive = false;
};

struct MasterStats {
  std::uint64_t registered_workers = 0;
  std::uint64_t live_workers = 0;
  std::uint64_t worker_timeouts = 0;
  std::uint64_t workers_lost = 0;
  std::uint64_t rescheduled_tasks = 0;
  std::uint64_t jobs_completed = 0;
  std::uint64_t jobs_failed = 0;
  std::array<std::uint64_t, net::kMaxTag + 1> received_by_tag{};
  std::array<std::uint64_t, net::kMaxTag + 1> sent_by_tag{};

  std::uint64_t received(net::Tag t) const { return received_by_tag[static_cast<std::size_t>(t)]; }
  std::uint64_t sent(net::Tag t) const { return sent_by_tag[static_cast<std::size_t>(t)]; }
};

// Accepts worker registrations and job submissions, hands out partitions from
// a FIFO queue as workers free their slots, and combines partial reductions
// in ascending partition order. All scheduling state sits behind one mutex.
class Master {
 public:
  // Binds immediately (port 0 = ephemeral). Throws Error(BindFailure).
  explicit Master(ClusterConfig config);
  ~Master();

  Master(const Master&) = delete;
  Master& operator=(const Master&) = delete;

  std::uint16_t port() const noexcept { return listener_.port(); }

  void start();
  void stop();

  bool ready() const;
  bool wait_ready(std::chrono::milliseconds timeout) const;

  // Throws Error(JobFailure) if no workers are alive or any task fails.
  JobResult run_job(const BenchmarkParams& params, std::span<const Stage> stages);

  MasterStats stats() const;
  std::vector<WorkerInfo> workers() const;

  using ResultObserver = std::function<void(const WorkerInfo&, const TaskResult&)>;
  using TimeoutObserver = std::function<void(const WorkerInfo&, std::chrono::milliseconds silent_for)>;
  // Invoked on connection threads, outside the scheduler lock.
  void on_result(ResultObserver observer);
  void on_timeout(TimeoutObserver observer);

 private:
  struct WorkerConn;
  struct StageRun;
  using Clock = std::chrono::steady_clock;

  void accept_loop();
  void monitor_loop();
  void handle_connection(std::shared_ptr<net::Socket> socket);
  void serve_worker(std::shared_ptr<net::Socket> socket, const RegisterRequest& request);
  void serve_client(net::Socket& socket, net::WireMessage first);

  std::vector<TaskResult> run_stage(const engine::LineageSpec& lineage, TaskAction action,
                                    std::uint64_t partitions, std::uint64_t& rescheduled);
  void pump_locked();
  bool send_locked(WorkerConn& w, const net::WireMessage& msg);
  void lose_worker_locked(WorkerConn& w, bool timed_out);
  std::uint64_t live_workers_locked() const;
  WorkerInfo info_of(const WorkerConn& w) const;

  ClusterConfig config_;
  net::Listener listener_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  bool running_ = false;
  bool stopping_ = false;
  std::map<std::uint32_t, std::shared_ptr<WorkerConn>> workers_;
  std::vector<std::shared_ptr<net::Socket>> clients_;
  std::unique_ptr<StageRun> stage_;
  std::uint32_t next_worker_id_ = 1;
  std::uint64_t next_stage_id_ = 1;
  MasterStats stats_;
  ResultObserver result_observer_;
  TimeoutObserver timeout_observer_;

  std::mutex job_mu_;  // one job at a time

  std::jthread accept_thread_;
  std::jthread monitor_thread_;
  std::mutex threads_mu_;
  std::vector<std::jthread> connection_threads_;
};

}  // namespace scalemap::cluster
