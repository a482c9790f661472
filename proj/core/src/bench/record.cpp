#include "scalemap/bench/record.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <json.hpp>

#include "scalemap/error.hpp"

namespace scalemap::bench {

using nlohmann::json;

std::string_view to_string(RunMode mode) noexcept {
  return mode == RunMode::Local ? "local" : "cluster";
}

std::string_view to_string(Scaling scaling) noexcept {
  switch (scaling) {
    case Scaling::None: return "none";
    case Scaling::Strong: return "strong";
    case Scaling::Weak: return "weak";
  }
  return "none";
}

RunMode parse_run_mode(std::string_view text) {
  if (text == "local") return RunMode::Local;
  if (text == "cluster") return RunMode::Cluster;
  fail(ErrorCode::ConfigError, "unknown run mode '" + std::string(text) + "'");
}

Scaling parse_scaling(std::string_view text) {
  if (text == "none") return Scaling::None;
  if (text == "strong") return Scaling::Strong;
  if (text == "weak") return Scaling::Weak;
  fail(ErrorCode::ConfigError, "unknown scaling mode '" + std::string(text) + "'");
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::ConfigError, "expected [x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json report_json(const engine::MaterializationReport& r) {
  return {{"partitions", r.partition_count},
          {"bytes", r.bytes_materialized},
          {"recomputed", r.recomputed_partitions},
          {"spilled", r.spilled_partitions}};
}

engine::MaterializationReport report_from(const json& j) {
  engine::MaterializationReport r;
  r.partition_count = j.at("partitions").get<std::uint64_t>();
  r.bytes_materialized = j.at("bytes").get<std::uint64_t>();
  r.recomputed_partitions = j.at("recomputed").get<std::uint64_t>();
  r.spilled_partitions = j.at("spilled").get<std::uint64_t>();
  return r;
}

}  // namespace

std::string to_json(const RunRecord& rec) {
  const BenchmarkParams& p = rec.params;
  json params = {{"blocks", p.blocks},
                 {"block_size", p.block_size_units},
                 {"vectors_per_unit", p.vectors_per_unit},
                 {"nodes", p.nodes},
                 {"cores", p.cores},
                 {"nparts", p.nparts},
                 {"partitions", p.partitions()},
                 {"seed", p.seed},
                 {"source", to_string(p.source)},
                 {"delta", vec_json(p.shift_delta)}};
  if (p.source == SourceKind::LoadBinary) {
    params["load_dir"] = p.load_dir.string();
    params["record_bytes"] = p.record_bytes;
  }
  const StageTimings& t = rec.timings;
  json j = {{"params", params},
            {"mode", to_string(rec.mode)},
            {"scaling", to_string(rec.scaling)},
            {"timings",
             {{"create_s", t.create_s},
              {"map_s", t.map_s},
              {"reduce_s", t.reduce_s},
              {"total_s", t.total_s},
              {"create", report_json(t.create)},
              {"map", report_json(t.map)}}},
            {"result", rec.result ? vec_json(*rec.result) : json(nullptr)},
            {"rep", rec.rep},
            {"timestamp", rec.timestamp}};
  return j.dump();
}

RunRecord parse_run_record(std::string_view text) {
  try {
    const json j = json::parse(text);
    RunRecord rec;
    const json& p = j.at("params");
    rec.params.blocks = p.at("blocks").get<std::uint64_t>();
    rec.params.block_size_units = p.at("block_size").get<std::uint64_t>();
    rec.params.vectors_per_unit = p.at("vectors_per_unit").get<std::uint64_t>();
    rec.params.nodes = p.at("nodes").get<std::uint64_t>();
    rec.params.cores = p.at("cores").get<std::uint64_t>();
    rec.params.nparts = p.at("nparts").get<std::uint64_t>();
    rec.params.seed = p.at("seed").get<std::uint64_t>();
    rec.params.source = parse_source_kind(p.at("source").get<std::string>());
    rec.params.shift_delta = vec_from(p.at("delta"));
    if (rec.params.source == SourceKind::LoadBinary) {
      rec.params.load_dir = p.at("load_dir").get<std::string>();
      rec.params.record_bytes = p.at("record_bytes").get<std::uint32_t>();
    }
    if (p.contains("partitions") && p["partitions"].get<std::uint64_t>() != rec.params.partitions())
      fail(ErrorCode::ConfigError, "params.partitions disagrees with nodes*cores*nparts");

    rec.mode = parse_run_mode(j.at("mode").get<std::string>());
    rec.scaling = j.contains("scaling") ? parse_scaling(j["scaling"].get<std::string>()) : Scaling::None;
    const json& t = j.at("timings");
    rec.timings.create_s = t.at("create_s").get<double>();
    rec.timings.map_s = t.at("map_s").get<double>();
    rec.timings.reduce_s = t.at("reduce_s").get<double>();
    rec.timings.total_s = t.at("total_s").get<double>();
    if (t.contains("create")) rec.timings.create = report_from(t["create"]);
    if (t.contains("map")) rec.timings.map = report_from(t["map"]);
    if (!j.at("result").is_null()) rec.result = vec_from(j["result"]);
    rec.rep = j.at("rep").get<std::uint64_t>();
    rec.timestamp = j.at("timestamp").get<std::string>();
    return rec;
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("invalid run record: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(ErrorCode::ConfigError, std::string("invalid run record: ") + e.what());
  }
}

std::vector<RunRecord> read_run_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IOError, "cannot read run records from '" + path.string() + "'");
  std::vector<RunRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_run_record(line));
    } catch (const Error& e) {
      fail(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_run_records(const std::filesystem::path& path, const std::vector<RunRecord>& records,
                       bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) fail(ErrorCode::IOError, "cannot write '" + path.string() + "'");
  for (const auto& r : records) out << to_json(r) << '\n';
  if (!out) fail(ErrorCode::IOError, "write failed on '" + path.string() + "'");
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

}  // namespace scalemap::bench
