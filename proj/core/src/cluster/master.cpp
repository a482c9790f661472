#include "scalemap/cluster/master.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <spdlog/spdlog.h>

#include "scalemap/engine/context.hpp"

namespace scalemap::cluster {

using net::Tag;
using net::WireMessage;

struct Master::WorkerConn {
  std::uint32_t id = 0;
  RegisterRequest info;
  std::shared_ptr<net::Socket> socket;
  std::mutex send_mu;
  std::set<std::uint32_t> inflight;
  Clock::time_point last_progress = Clock::now();
  bool alive = true;
};

struct Master::StageRun {
  std::uint64_t stage_id = 0;
  TaskAction action = TaskAction::Force;
  engine::LineageSpec lineage;
  std::deque<std::uint32_t> pending;
  std::vector<std::optional<TaskResult>> results;
  std::uint64_t remaining = 0;
  std::uint64_t rescheduled = 0;
  std::vector<std::string> failures;
  bool no_workers = false;
};

Master::Master(ClusterConfig config)
    : config_(std::move(config)),
      listener_(net::Listener::bind(config_.bind_host, config_.master.port)) {
  net::ignore_sigpipe();
}

Master::~Master() { stop(); }

void Master::start() {
  std::lock_guard lock(mu_);
  if (running_) return;
  running_ = true;
  accept_thread_ = std::jthread([this] { accept_loop(); });
  monitor_thread_ = std::jthread([this] { monitor_loop(); });
  spdlog::info("master listening on port {} expecting {} worker(s)", port(), config_.expected_workers);
}

void Master::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ || !running_) {
      stopping_ = true;
      return;
    }
    stopping_ = true;
    for (auto& [id, w] : workers_) {
      if (w->alive) send_locked(*w, shutdown_message());
      w->socket->shutdown();
    }
    for (auto& c : clients_) c->shutdown();
  }
  cv_.notify_all();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (monitor_thread_.joinable()) monitor_thread_.join();
  listener_.close();
  std::vector<std::jthread> threads;
  {
    std::lock_guard lock(threads_mu_);
    threads.swap(connection_threads_);
  }
  threads.clear();  // joins
}

void Master::accept_loop() {
  for (;;) {
    {
      std::lock_guard lock(mu_);
      if (stopping_) return;
    }
    auto accepted = listener_.accept_for(kSchedulingQuantum);
    if (!accepted) continue;
    auto socket = std::make_shared<net::Socket>(std::move(*accepted));
    std::lock_guard lock(threads_mu_);
    connection_threads_.emplace_back([this, socket] { handle_connection(socket); });
  }
}

void Master::monitor_loop() {
  std::unique_lock lock(mu_);
  const auto timeout = std::chrono::milliseconds(config_.network_timeout_ms);
  while (!stopping_) {
    cv_.wait_for(lock, kSchedulingQuantum);
    const auto now = Clock::now();
    for (auto& [id, w] : workers_) {
      if (!w->alive) continue;
      const bool watched = !w->inflight.empty() || config_.heartbeat_interval_ms > 0;
      const auto silent = std::chrono::duration_cast<std::chrono::milliseconds>(now - w->last_progress);
      if (watched && silent > timeout) {
        spdlog::warn("WorkerTimeout: worker {} ({}) silent for {} ms", w->id, w->info.name,
                     silent.count());
        const WorkerInfo info = info_of(*w);
        lose_worker_locked(*w, true);
        if (timeout_observer_) {
          auto observer = timeout_observer_;
          lock.unlock();
          observer(info, silent);
          lock.lock();
        }
      }
    }
  }
}

void Master::handle_connection(std::shared_ptr<net::Socket> socket) {
  std::optional<WireMessage> first;
  try {
    socket->set_recv_timeout(std::chrono::milliseconds(config_.network_timeout_ms));
    first = net::read_message(*socket);
    socket->set_recv_timeout(std::chrono::milliseconds(0));
  } catch (const Error& e) {
    spdlog::debug("dropping connection before first message: {}", e.what());
    return;
  }
  if (!first) return;
  {
    std::lock_guard lock(mu_);
    ++stats_.received_by_tag[static_cast<std::size_t>(first->tag)];
    if (stopping_) return;
  }

  try {
    if (first->tag == Tag::Register) {
      serve_worker(socket, decode_register_request(*first));
    } else if (first->tag == Tag::Submit) {
      {
        std::lock_guard lock(mu_);
        clients_.push_back(socket);
      }
      serve_client(*socket, std::move(*first));
    } else {
      net::write_message(*socket, encode(ErrorReport{0, kNoPartition, ErrorCode::ProtocolError,
                                                     "expected REGISTER or SUBMIT"}));
    }
  } catch (const Error& e) {
    spdlog::debug("connection ended: {}", e.what());
  }
}

void Master::serve_worker(std::shared_ptr<net::Socket> socket, const RegisterRequest& request) {
  auto w = std::make_shared<WorkerConn>();
  w->info = request;
  w->socket = socket;
  {
    std::lock_guard lock(mu_);
    w->id = next_worker_id_++;
    workers_[w->id] = w;
    ++stats_.registered_workers;
    if (!send_locked(*w, encode(RegisterAck{w->id, config_.heartbeat_interval_ms}))) return;
    spdlog::info("worker {} registered: {} pid {} with {} slot(s)", w->id, request.name, request.pid,
                 request.slots);
    pump_locked();
  }
  cv_.notify_all();

  for (;;) {
    std::optional<WireMessage> msg;
    try {
      msg = net::read_message(*socket);
    } catch (const Error& e) {
      spdlog::debug("worker {} read failed: {}", w->id, e.what());
    }
    std::unique_lock lock(mu_);
    if (!msg) {
      if (w->alive && !stopping_) spdlog::warn("worker {} disconnected", w->id);
      lose_worker_locked(*w, false);
      return;
    }
    if (!w->alive) return;
    ++stats_.received_by_tag[static_cast<std::size_t>(msg->tag)];
    w->last_progress = Clock::now();

    try {
      if (msg->tag == Tag::Result) {
        const TaskResult r = decode_result(*msg);
        if (stage_ && r.job_id == stage_->stage_id && w->inflight.erase(r.partition) > 0) {
          auto& slot = stage_->results[r.partition];
          if (!slot) {
            slot = r;
            --stage_->remaining;
          }
          pump_locked();
          cv_.notify_all();
          if (result_observer_) {
            auto observer = result_observer_;
            const WorkerInfo info = info_of(*w);
            lock.unlock();
            observer(info, r);
          }
        }
      } else if (msg->tag == Tag::Error) {
        const ErrorReport e = decode_error(*msg);
        if (stage_ && e.job_id == stage_->stage_id && w->inflight.erase(e.partition) > 0) {
          stage_->failures.push_back("partition " + std::to_string(e.partition) + " on worker " +
                                     std::to_string(w->id) + ": " +
                                     std::string(to_string(e.code)) + ": " + e.message);
          cv_.notify_all();
        } else {
          spdlog::warn("worker {} reported: {}: {}", w->id, to_string(e.code), e.message);
        }
      } else if (msg->tag == Tag::Heartbeat) {
        decode_heartbeat(*msg);
      } else {
        spdlog::warn("worker {} sent unexpected {}", w->id, net::to_string(msg->tag));
      }
    } catch (const Error& e) {
      spdlog::warn("worker {} sent a malformed {}: {}", w->id, net::to_string(msg->tag), e.what());
    }
  }
}

void Master::serve_client(net::Socket& socket, WireMessage first) {
  std::optional<WireMessage> msg = std::move(first);
  while (msg) {
    WireMessage reply;
    try {
      const SubmitRequest req = decode_submit(*msg);
      wait_ready(std::chrono::milliseconds(config_.network_timeout_ms));
      reply = encode(run_job(req.params, req.stages));
    } catch (const Error& e) {
      reply = encode(ErrorReport{0, kNoPartition, e.code(), e.what()});
    }
    net::write_message(socket, reply);
    {
      std::lock_guard lock(mu_);
      ++stats_.sent_by_tag[static_cast<std::size_t>(reply.tag)];
    }
    msg = net::read_message(socket);
    if (msg) {
      std::lock_guard lock(mu_);
      ++stats_.received_by_tag[static_cast<std::size_t>(msg->tag)];
    }
  }
}

bool Master::send_locked(WorkerConn& w, const WireMessage& msg) {
  try {
    std::lock_guard send_lock(w.send_mu);
    net::write_message(*w.socket, msg);
    ++stats_.sent_by_tag[static_cast<std::size_t>(msg.tag)];
    return true;
  } catch (const Error& e) {
    spdlog::warn("send to worker {} failed: {}", w.id, e.what());
    lose_worker_locked(w, false);
    return false;
  }
}

void Master::lose_worker_locked(WorkerConn& w, bool timed_out) {
  if (!w.alive) return;
  w.alive = false;
  w.socket->shutdown();
  if (timed_out) {
    ++stats_.worker_timeouts;
  } else if (!stopping_) {
    ++stats_.workers_lost;
  }
  if (stage_) {
    // Lineage makes every task self-contained, so requeueing is always safe.
    for (auto it = w.inflight.rbegin(); it != w.inflight.rend(); ++it) {
      stage_->pending.push_front(*it);
      ++stage_->rescheduled;
      ++stats_.rescheduled_tasks;
    }
    if (live_workers_locked() == 0 && stage_->remaining > 0) stage_->no_workers = true;
  }
  w.inflight.clear();
  cv_.notify_all();
  pump_locked();
}

void Master::pump_locked() {
  if (!stage_ || !stage_->failures.empty()) return;
  while (!stage_->pending.empty()) {
    WorkerConn* best = nullptr;
    std::int64_t best_free = 0;
    for (auto& [id, w] : workers_) {
      if (!w->alive) continue;
      const auto free = static_cast<std::int64_t>(w->info.slots) -
                        static_cast<std::int64_t>(w->inflight.size());
      if (free > best_free) {
        best = w.get();
        best_free = free;
      }
    }
    if (best == nullptr) return;

    const std::uint32_t p = stage_->pending.front();
    stage_->pending.pop_front();
    if (best->inflight.empty()) best->last_progress = Clock::now();
    best->inflight.insert(p);
    TaskDescriptor task{stage_->stage_id, p, stage_->action, stage_->lineage};
    // On failure the worker is marked lost and the task is requeued.
    send_locked(*best, encode(task));
    if (!stage_) return;
  }
}

std::uint64_t Master::live_workers_locked() const {
  return static_cast<std::uint64_t>(std::count_if(
      workers_.begin(), workers_.end(), [](const auto& kv) { return kv.second->alive; }));
}

WorkerInfo Master::info_of(const WorkerConn& w) const {
  return WorkerInfo{w.id, w.info.pid, w.info.name, w.info.slots, w.alive};
}

bool Master::ready() const {
  std::lock_guard lock(mu_);
  return live_workers_locked() >= config_.expected_workers;
}

bool Master::wait_ready(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] {
    return stopping_ || live_workers_locked() >= config_.expected_workers;
  }) && !stopping_;
}

std::vector<TaskResult> Master::run_stage(const engine::LineageSpec& lineage, TaskAction action,
                                          std::uint64_t partitions, std::uint64_t& rescheduled) {
  std::unique_lock lock(mu_);
  if (live_workers_locked() == 0) fail(ErrorCode::JobFailure, "NoWorkers: no registered workers");

  stage_ = std::make_unique<StageRun>();
  stage_->stage_id = next_stage_id_++;
  stage_->action = action;
  stage_->lineage = lineage;
  for (std::uint64_t p = 0; p < partitions; ++p) stage_->pending.push_back(static_cast<std::uint32_t>(p));
  stage_->results.resize(partitions);
  stage_->remaining = partitions;
  pump_locked();

  cv_.wait(lock, [&] {
    return stopping_ || stage_->remaining == 0 || !stage_->failures.empty() || stage_->no_workers;
  });

  std::unique_ptr<StageRun> done = std::move(stage_);
  for (auto& [id, w] : workers_) w->inflight.clear();
  rescheduled += done->rescheduled;

  if (stopping_ && done->remaining > 0) fail(ErrorCode::JobFailure, "master shutting down");
  if (!done->failures.empty()) {
    std::string causes;
    for (const auto& f : done->failures) causes += (causes.empty() ? "" : "; ") + f;
    fail(ErrorCode::JobFailure, "task failures: " + causes);
  }
  if (done->no_workers)
    fail(ErrorCode::JobFailure, "NoWorkers: all workers lost with " +
                                    std::to_string(done->remaining) + " partition(s) outstanding");

  std::vector<TaskResult> results;
  results.reserve(partitions);
  for (auto& r : done->results) results.push_back(*r);
  return results;
}

namespace {

engine::MaterializationReport aggregate(const std::vector<TaskResult>& results) {
  engine::MaterializationReport report;
  report.partition_count = results.size();
  for (const auto& r : results) {
    report.bytes_materialized += r.bytes_materialized;
    report.recomputed_partitions += r.recomputed_partitions;
    report.spilled_partitions += r.spilled_partitions;
  }
  return report;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

JobResult Master::run_job(const BenchmarkParams& params, std::span<const Stage> stages) {
  std::lock_guard job_lock(job_mu_);
  try {
    if (params.source == SourceKind::LoadBinary)
      fail(ErrorCode::InvalidParams, "cluster mode supports generated sources only");
    params.validate();
    const std::uint64_t partitions = params.partitions();
    if (partitions > kNoPartition)
      fail(ErrorCode::InvalidParams, "too many partitions: " + std::to_string(partitions));

    const engine::LineageSpec created{params, {}};
    const engine::LineageSpec mapped{params, {params.shift_delta}};

    JobResult job;
    job.partitions = partitions;
    const auto total_start = Clock::now();
    for (Stage stage : stages) {
      const auto start = Clock::now();
      switch (stage) {
        case Stage::Create:
          job.timings.create =
              aggregate(run_stage(created, TaskAction::Force, partitions, job.rescheduled_tasks));
          job.timings.create_s = seconds_since(start);
          break;
        case Stage::Map:
          job.timings.map =
              aggregate(run_stage(mapped, TaskAction::Force, partitions, job.rescheduled_tasks));
          job.timings.map_s = seconds_since(start);
          break;
        case Stage::Reduce: {
          const auto results =
              run_stage(mapped, TaskAction::PartialReduce, partitions, job.rescheduled_tasks);
          std::vector<engine::PartialSum> partials;
          partials.reserve(results.size());
          for (const auto& r : results) partials.push_back({r.sum, r.count});
          job.result = engine::average_of(partials);
          job.timings.reduce_s = seconds_since(start);
          break;
        }
      }
    }
    job.timings.total_s = seconds_since(total_start);
    std::lock_guard lock(mu_);
    ++stats_.jobs_completed;
    return job;
  } catch (...) {
    std::lock_guard lock(mu_);
    ++stats_.jobs_failed;
    throw;
  }
}

MasterStats Master::stats() const {
  std::lock_guard lock(mu_);
  MasterStats s = stats_;
  s.live_workers = live_workers_locked();
  return s;
}

std::vector<WorkerInfo> Master::workers() const {
  std::lock_guard lock(mu_);
  std::vector<WorkerInfo> out;
  for (const auto& [id, w] : workers_) out.push_back(info_of(*w));
  return out;
}

void Master::on_result(ResultObserver observer) {
  std::lock_guard lock(mu_);
  result_observer_ = std::move(observer);
}

void Master::on_timeout(TimeoutObserver observer) {
  std::lock_guard lock(mu_);
  timeout_observer_ = std::move(observer);
}

}  // namespace scalemap::cluster
