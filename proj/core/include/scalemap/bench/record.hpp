#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scalemap/bench/timings.hpp"
#include "scalemap/core/params.hpp"
#include "scalemap/core/vec3.hpp"

namespace scalemap::bench {

enum class RunMode { Local, Cluster };
enum class Scaling { None, Strong, Weak };

std::string_view to_string(RunMode mode) noexcept;
std::string_view to_string(Scaling scaling) noexcept;
RunMode parse_run_mode(std::string_view text);
Scaling parse_scaling(std::string_view text);

struct RunRecord {
  BenchmarkParams params;
  RunMode mode = RunMode::Local;
  Scaling scaling = Scaling::None;
  StageTimings timings;
  std::optional<Vec3> result;  // empty with --skip-reduce
  std::string timestamp;       // UTC, ISO-8601
  std::uint64_t rep = 0;
};

// One JSON object, no trailing newline:
// {"params":{...},"mode":"local","scaling":"none",
//  "timings":{"create_s":..,"map_s":..,"reduce_s":..,"total_s":..,"create":{..},"map":{..}},
//  "result":[x,y,z] | null,"rep":0,"timestamp":"..."}
std::string to_json(const RunRecord& record);
// Throws Error(ConfigError) on schema violations.
RunRecord parse_run_record(std::string_view json);

// JSON-lines files: one record per line, blank lines ignored.
// Throws Error(IOError) naming the path when it cannot be read.
std::vector<RunRecord> read_run_records(const std::filesystem::path& path);
void write_run_records(const std::filesystem::path& path, const std::vector<RunRecord>& records,
                       bool append = false);

std::string utc_timestamp();

}  // namespace scalemap::bench
