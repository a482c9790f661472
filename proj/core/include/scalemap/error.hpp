#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scalemap {

enum class ErrorCode {
  InvalidParams,
  ConfigError,
  IndivisibleLength,
  IOError,
  SpillIOFailure,
  EmptyDataset,
  UnknownPartition,
  RecomputeFailure,
  ProtocolError,
  BindFailure,
  ConnectFailure,
  WorkerTimeout,
  TaskFailure,
  JobFailure,
  ServerUnreachable,
  NonPositiveTime,
  NonPositiveFactor,
  MixedModes,
  MissingBasePoint,
  UsageError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; `code()` is what callers branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace scalemap
