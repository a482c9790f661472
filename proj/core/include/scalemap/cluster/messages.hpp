#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scalemap/bench/timings.hpp"
#include "scalemap/core/vec3.hpp"
#include "scalemap/engine/lineage.hpp"
#include "scalemap/error.hpp"
#include "scalemap/net/wire.hpp"

namespace scalemap::cluster {

inline constexpr std::uint32_t kNoPartition = 0xFFFFFFFFu;

enum class TaskAction : std::uint8_t { Force = 0, PartialReduce = 1 };

enum class Stage : std::uint8_t { Create = 0, Map = 1, Reduce = 2 };

std::string_view to_string(Stage stage) noexcept;

// Worker -> master.
struct RegisterRequest {
  std::uint32_t slots = 1;
  std::int32_t pid = 0;
  std::string name;
  friend bool operator==(const RegisterRequest&, const RegisterRequest&) = default;
};

// Master -> worker, same tag.
struct RegisterAck {
  std::uint32_t worker_id = 0;
  std::uint64_t heartbeat_interval_ms = 0;
  friend bool operator==(const RegisterAck&, const RegisterAck&) = default;
};

// Self-contained: the lineage is enough to rebuild the partition anywhere.
struct TaskDescriptor {
  std::uint64_t job_id = 0;
  std::uint32_t partition = 0;
  TaskAction action = TaskAction::Force;
  engine::LineageSpec lineage;
  friend bool operator==(const TaskDescriptor&, const TaskDescriptor&) = default;
};

struct TaskResult {
  std::uint64_t job_id = 0;
  std::uint32_t partition = 0;
  TaskAction action = TaskAction::Force;
  Vec3 sum;
  std::uint64_t count = 0;
  std::uint64_t bytes_materialized = 0;
  std::uint64_t recomputed_partitions = 0;
  std::uint64_t spilled_partitions = 0;
  friend bool operator==(const TaskResult&, const TaskResult&) = default;
};

struct Heartbeat {
  std::uint32_t worker_id = 0;
  std::uint64_t sequence = 0;
  friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};

struct ErrorReport {
  std::uint64_t job_id = 0;
  std::uint32_t partition = kNoPartition;
  ErrorCode code = ErrorCode::TaskFailure;
  std::string message;
  friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

struct SubmitRequest {
  BenchmarkParams params;
  std::vector<Stage> stages;
  friend bool operator==(const SubmitRequest&, const SubmitRequest&) = default;
};

struct JobResult {
  std::optional<Vec3> result;  // empty when the pipeline has no reduce stage
  bench::StageTimings timings;
  std::uint64_t partitions = 0;
  std::uint64_t rescheduled_tasks = 0;
};

net::WireMessage encode(const RegisterRequest& m);
net::WireMessage encode(const RegisterAck& m);
net::WireMessage encode(const TaskDescriptor& m);
net::WireMessage encode(const TaskResult& m);
net::WireMessage encode(const Heartbeat& m);
net::WireMessage encode(const ErrorReport& m);
net::WireMessage encode(const SubmitRequest& m);
net::WireMessage encode(const JobResult& m);
net::WireMessage shutdown_message();

// Each decoder checks the tag and consumes the whole payload; anything else
// throws Error(ProtocolError).
RegisterRequest decode_register_request(const net::WireMessage& msg);
RegisterAck decode_register_ack(const net::WireMessage& msg);
TaskDescriptor decode_task(const net::WireMessage& msg);
TaskResult decode_result(const net::WireMessage& msg);
Heartbeat decode_heartbeat(const net::WireMessage& msg);
ErrorReport decode_error(const net::WireMessage& msg);
SubmitRequest decode_submit(const net::WireMessage& msg);
JobResult decode_job_result(const net::WireMessage& msg);

}  // namespace scalemap::cluster
