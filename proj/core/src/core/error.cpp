#include "scalemap/error.hpp"

namespace scalemap {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IndivisibleLength: return "IndivisibleLength";
    case ErrorCode::IOError: return "IOError";
    case ErrorCode::SpillIOFailure: return "SpillIOFailure";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::UnknownPartition: return "UnknownPartition";
    case ErrorCode::RecomputeFailure: return "RecomputeFailure";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::ConnectFailure: return "ConnectFailure";
    case ErrorCode::WorkerTimeout: return "WorkerTimeout";
    case ErrorCode::TaskFailure: return "TaskFailure";
    case ErrorCode::JobFailure: return "JobFailure";
    case ErrorCode::ServerUnreachable: return "ServerUnreachable";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::NonPositiveFactor: return "NonPositiveFactor";
    case ErrorCode::MixedModes: return "MixedModes";
    case ErrorCode::MissingBasePoint: return "MissingBasePoint";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace scalemap
