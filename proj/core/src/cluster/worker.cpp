#include "scalemap/cluster/worker.hpp"

#include <spdlog/spdlog.h>
#include <thread>
#include <unistd.h>
#include <vector>

namespace scalemap::cluster {

using net::Tag;
using net::WireMessage;

namespace {

std::string default_name() {
  char host[256] = {};
  ::gethostname(host, sizeof(host) - 1);
  return std::string(host) + ":" + std::to_string(::getpid());
}

engine::EngineConfig worker_engine_config(engine::EngineConfig cfg) {
  // Each task is one partition; parallelism comes from the slot threads.
  cfg.slots = 1;
  return cfg;
}

}  // namespace

Worker::Worker(ClusterConfig config, std::string name)
    : config_(std::move(config)),
      name_(name.empty() ? default_name() : std::move(name)),
      engine_(worker_engine_config(config_.engine)) {
  if (config_.slots == 0) config_.slots = 1;
  net::ignore_sigpipe();
}

Worker::~Worker() { stop(); }

void Worker::connect_and_register() {
  const auto timeout = std::chrono::milliseconds(config_.network_timeout_ms);
  for (std::uint32_t attempt = 0;; ++attempt) {
    try {
      socket_ = net::Socket::connect(config_.master, timeout);
      net::write_message(socket_,
                         encode(RegisterRequest{config_.slots, static_cast<std::int32_t>(::getpid()), name_}));
      socket_.set_recv_timeout(timeout);
      auto reply = net::read_message(socket_);
      socket_.set_recv_timeout(std::chrono::milliseconds(0));
      if (!reply) fail(ErrorCode::ConnectFailure, "master closed the connection during registration");
      const RegisterAck ack = decode_register_ack(*reply);
      worker_id_ = ack.worker_id;
      heartbeat_interval_ms_ = ack.heartbeat_interval_ms;
      registered_ = true;
      spdlog::info("registered with {} as worker {}", config_.master.to_string(), ack.worker_id);
      return;
    } catch (const Error& e) {
      socket_.close();
      if (attempt >= config_.registration_retries || stopped_)
        fail(ErrorCode::ConnectFailure, "cannot register with master " + config_.master.to_string() +
                                            " after " + std::to_string(attempt + 1) +
                                            " attempt(s): " + e.what());
      spdlog::warn("registration attempt {} failed ({}), retrying", attempt + 1, e.what());
      std::this_thread::sleep_for(config_.retry_delay);
    }
  }
}

void Worker::send(const WireMessage& msg) {
  std::lock_guard lock(send_mu_);
  net::write_message(socket_, msg);
}

void Worker::execute(const TaskDescriptor& task) {
  const auto now_active = ++active_;
  std::uint64_t prev = max_concurrent_.load();
  while (now_active > prev && !max_concurrent_.compare_exchange_weak(prev, now_active)) {
  }

  WireMessage reply;
  try {
    const engine::Dataset ds = engine_.from_lineage(task.lineage, config_.storage);
    TaskResult r;
    r.job_id = task.job_id;
    r.partition = task.partition;
    r.action = task.action;
    if (task.action == TaskAction::Force) {
      const auto report = engine_.force_partition(ds, task.partition);
      r.bytes_materialized = report.bytes_materialized;
      r.recomputed_partitions = report.recomputed_partitions;
      r.spilled_partitions = report.spilled_partitions;
    } else {
      const auto partial = engine_.partial_sum(ds, task.partition);
      r.sum = partial.sum;
      r.count = partial.count;
    }
    reply = encode(r);
    ++tasks_executed_;
  } catch (const Error& e) {
    ++task_errors_;
    reply = encode(ErrorReport{task.job_id, task.partition, e.code(), e.what()});
  } catch (const std::exception& e) {
    ++task_errors_;
    reply = encode(ErrorReport{task.job_id, task.partition, ErrorCode::TaskFailure, e.what()});
  }
  --active_;
  if (killed_) return;
  try {
    send(reply);
  } catch (const Error& e) {
    spdlog::debug("result for partition {} not delivered: {}", task.partition, e.what());
  }
}

void Worker::slot_loop() {
  for (;;) {
    TaskDescriptor task;
    {
      std::unique_lock lock(queue_mu_);
      queue_cv_.wait(lock, [&] { return draining_ || !queue_.empty(); });
      if (draining_) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    execute(task);
  }
}

void Worker::heartbeat_loop(std::stop_token stop) {
  const auto interval = std::chrono::milliseconds(heartbeat_interval_ms_.load());
  std::mutex mu;
  std::condition_variable_any cv;
  std::uint64_t sequence = 0;
  std::unique_lock lock(mu);
  auto next = std::chrono::steady_clock::now() + interval;
  while (!stop.stop_requested()) {
    if (cv.wait_until(lock, stop, next, [] { return false; })) break;
    next += interval;
    if (stop.stop_requested()) break;
    try {
      send(encode(Heartbeat{worker_id_, ++sequence}));
      ++heartbeats_sent_;
    } catch (const Error&) {
      return;
    }
  }
}

void Worker::run() {
  connect_and_register();

  std::vector<std::jthread> slots;
  for (std::uint32_t i = 0; i < config_.slots; ++i) slots.emplace_back([this] { slot_loop(); });
  std::jthread heartbeat;
  if (heartbeat_interval_ms_ > 0)
    heartbeat = std::jthread([this](std::stop_token st) { heartbeat_loop(st); });

  while (!stopped_) {
    std::optional<WireMessage> msg;
    try {
      msg = net::read_message(socket_);
    } catch (const Error& e) {
      if (!stopped_) spdlog::warn("lost connection to master: {}", e.what());
      break;
    }
    if (!msg) break;
    if (msg->tag == Tag::Shutdown) {
      spdlog::info("worker {} received SHUTDOWN", worker_id_.load());
      break;
    }
    if (msg->tag != Tag::Task) {
      ++protocol_errors_;
      try {
        send(encode(ErrorReport{0, kNoPartition, ErrorCode::ProtocolError,
                                "unexpected " + std::string(net::to_string(msg->tag))}));
      } catch (const Error&) {
        break;
      }
      continue;
    }
    try {
      TaskDescriptor task = decode_task(*msg);
      {
        std::lock_guard lock(queue_mu_);
        queue_.push_back(std::move(task));
      }
      queue_cv_.notify_one();
    } catch (const Error& e) {
      ++protocol_errors_;
      try {
        send(encode(ErrorReport{0, kNoPartition, ErrorCode::ProtocolError,
                                std::string("malformed TASK: ") + e.what()}));
      } catch (const Error&) {
        break;
      }
    }
  }

  {
    std::lock_guard lock(queue_mu_);
    draining_ = true;
    queue_.clear();
  }
  queue_cv_.notify_all();
  heartbeat = {};
  slots.clear();
  registered_ = false;
  socket_.close();
}

void Worker::stop() {
  stopped_ = true;
  socket_.shutdown();
}

void Worker::kill() {
  killed_ = true;
  stopped_ = true;
  socket_.shutdown();
}

WorkerStats Worker::stats() const {
  WorkerStats s;
  s.tasks_executed = tasks_executed_;
  s.task_errors = task_errors_;
  s.protocol_errors = protocol_errors_;
  s.max_concurrent_tasks = max_concurrent_;
  s.heartbeats_sent = heartbeats_sent_;
  return s;
}

}  // namespace scalemap::cluster
