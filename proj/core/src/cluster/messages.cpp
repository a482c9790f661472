#include "scalemap/cluster/messages.hpp"

#include "scalemap/core/bytes.hpp"

namespace scalemap::cluster {

using net::Tag;
using net::WireMessage;

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::Create: return "create";
    case Stage::Map: return "map";
    case Stage::Reduce: return "reduce";
  }
  return "unknown";
}

namespace {

void expect_tag(const WireMessage& msg, Tag tag) {
  if (msg.tag != tag)
    fail(ErrorCode::ProtocolError, "expected " + std::string(net::to_string(tag)) + ", got " +
                                       std::string(net::to_string(msg.tag)));
}

TaskAction decode_action(std::uint8_t v) {
  if (v > 1) fail(ErrorCode::ProtocolError, "bad task action " + std::to_string(v));
  return static_cast<TaskAction>(v);
}

void put_report(ByteWriter& w, const engine::MaterializationReport& r) {
  w.le(r.partition_count).le(r.bytes_materialized).le(r.recomputed_partitions).le(r.spilled_partitions);
}

engine::MaterializationReport get_report(ByteReader& r) {
  engine::MaterializationReport m;
  m.partition_count = r.le<std::uint64_t>();
  m.bytes_materialized = r.le<std::uint64_t>();
  m.recomputed_partitions = r.le<std::uint64_t>();
  m.spilled_partitions = r.le<std::uint64_t>();
  return m;
}

}  // namespace

WireMessage encode(const RegisterRequest& m) {
  WireMessage msg{Tag::Register, {}};
  ByteWriter(msg.payload).le(m.slots).le(m.pid).str(m.name);
  return msg;
}

WireMessage encode(const RegisterAck& m) {
  WireMessage msg{Tag::Register, {}};
  ByteWriter(msg.payload).le(m.worker_id).le(m.heartbeat_interval_ms);
  return msg;
}

WireMessage encode(const TaskDescriptor& m) {
  WireMessage msg{Tag::Task, {}};
  ByteWriter(msg.payload).le(m.job_id).le(m.partition).u8(static_cast<std::uint8_t>(m.action));
  engine::encode_lineage(m.lineage, msg.payload);
  return msg;
}

WireMessage encode(const TaskResult& m) {
  WireMessage msg{Tag::Result, {}};
  ByteWriter(msg.payload)
      .le(m.job_id)
      .le(m.partition)
      .u8(static_cast<std::uint8_t>(m.action))
      .vec3(m.sum)
      .le(m.count)
      .le(m.bytes_materialized)
      .le(m.recomputed_partitions)
      .le(m.spilled_partitions);
  return msg;
}

WireMessage encode(const Heartbeat& m) {
  WireMessage msg{Tag::Heartbeat, {}};
  ByteWriter(msg.payload).le(m.worker_id).le(m.sequence);
  return msg;
}

WireMessage encode(const ErrorReport& m) {
  WireMessage msg{Tag::Error, {}};
  ByteWriter(msg.payload)
      .le(m.job_id)
      .le(m.partition)
      .le(static_cast<std::uint16_t>(m.code))
      .str(m.message);
  return msg;
}

WireMessage encode(const SubmitRequest& m) {
  WireMessage msg{Tag::Submit, {}};
  engine::encode_params(m.params, msg.payload);
  ByteWriter w(msg.payload);
  w.le(static_cast<std::uint32_t>(m.stages.size()));
  for (Stage s : m.stages) w.u8(static_cast<std::uint8_t>(s));
  return msg;
}

WireMessage encode(const JobResult& m) {
  WireMessage msg{Tag::JobResult, {}};
  ByteWriter w(msg.payload);
  w.u8(m.result ? 1 : 0).vec3(m.result.value_or(Vec3{}));
  w.le(m.timings.create_s).le(m.timings.map_s).le(m.timings.reduce_s).le(m.timings.total_s);
  put_report(w, m.timings.create);
  put_report(w, m.timings.map);
  w.le(m.partitions).le(m.rescheduled_tasks);
  return msg;
}

WireMessage shutdown_message() { return WireMessage{Tag::Shutdown, {}}; }

RegisterRequest decode_register_request(const WireMessage& msg) {
  expect_tag(msg, Tag::Register);
  ByteReader r(msg.payload);
  RegisterRequest m;
  m.slots = r.le<std::uint32_t>();
  m.pid = r.le<std::int32_t>();
  m.name = r.str();
  r.expect_done("REGISTER");
  return m;
}

RegisterAck decode_register_ack(const WireMessage& msg) {
  expect_tag(msg, Tag::Register);
  ByteReader r(msg.payload);
  RegisterAck m;
  m.worker_id = r.le<std::uint32_t>();
  m.heartbeat_interval_ms = r.le<std::uint64_t>();
  r.expect_done("REGISTER ack");
  return m;
}

TaskDescriptor decode_task(const WireMessage& msg) {
  expect_tag(msg, Tag::Task);
  ByteReader r(msg.payload);
  TaskDescriptor m;
  m.job_id = r.le<std::uint64_t>();
  m.partition = r.le<std::uint32_t>();
  m.action = decode_action(r.u8());
  const std::size_t used = engine::decode_lineage(r.rest(), m.lineage);
  if (used != r.remaining())
    fail(ErrorCode::ProtocolError, "TASK: " + std::to_string(r.remaining() - used) + " trailing bytes");
  return m;
}

TaskResult decode_result(const WireMessage& msg) {
  expect_tag(msg, Tag::Result);
  ByteReader r(msg.payload);
  TaskResult m;
  m.job_id = r.le<std::uint64_t>();
  m.partition = r.le<std::uint32_t>();
  m.action = decode_action(r.u8());
  m.sum = r.vec3();
  m.count = r.le<std::uint64_t>();
  m.bytes_materialized = r.le<std::uint64_t>();
  m.recomputed_partitions = r.le<std::uint64_t>();
  m.spilled_partitions = r.le<std::uint64_t>();
  r.expect_done("RESULT");
  return m;
}

Heartbeat decode_heartbeat(const WireMessage& msg) {
  expect_tag(msg, Tag::Heartbeat);
  ByteReader r(msg.payload);
  Heartbeat m;
  m.worker_id = r.le<std::uint32_t>();
  m.sequence = r.le<std::uint64_t>();
  r.expect_done("HEARTBEAT");
  return m;
}

ErrorReport decode_error(const WireMessage& msg) {
  expect_tag(msg, Tag::Error);
  ByteReader r(msg.payload);
  ErrorReport m;
  m.job_id = r.le<std::uint64_t>();
  m.partition = r.le<std::uint32_t>();
  const auto code = r.le<std::uint16_t>();
  if (code > static_cast<std::uint16_t>(ErrorCode::UsageError))
    fail(ErrorCode::ProtocolError, "bad error code " + std::to_string(code));
  m.code = static_cast<ErrorCode>(code);
  m.message = r.str();
  r.expect_done("ERROR");
  return m;
}

SubmitRequest decode_submit(const WireMessage& msg) {
  expect_tag(msg, Tag::Submit);
  SubmitRequest m;
  const std::size_t used = engine::decode_params(msg.payload, m.params);
  ByteReader r(std::span<const std::byte>(msg.payload).subspan(used));
  const auto n = r.le<std::uint32_t>();
  if (n > r.remaining()) fail(ErrorCode::ProtocolError, "SUBMIT: stage count exceeds payload");
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto s = r.u8();
    if (s > 2) fail(ErrorCode::ProtocolError, "SUBMIT: bad stage " + std::to_string(s));
    m.stages.push_back(static_cast<Stage>(s));
  }
  r.expect_done("SUBMIT");
  return m;
}

JobResult decode_job_result(const WireMessage& msg) {
  expect_tag(msg, Tag::JobResult);
  ByteReader r(msg.payload);
  JobResult m;
  const bool has = r.u8() != 0;
  const Vec3 v = r.vec3();
  if (has) m.result = v;
  m.timings.create_s = r.le<double>();
  m.timings.map_s = r.le<double>();
  m.timings.reduce_s = r.le<double>();
  m.timings.total_s = r.le<double>();
  m.timings.create = get_report(r);
  m.timings.map = get_report(r);
  m.partitions = r.le<std::uint64_t>();
  m.rescheduled_tasks = r.le<std::uint64_t>();
  r.expect_done("JOB_RESULT");
  return m;
}

}  // namespace scalemap::cluster
