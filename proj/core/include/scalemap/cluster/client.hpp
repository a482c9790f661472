#pragma once

#include <chrono>
#include <span>

#include "scalemap/cluster/config.hpp"
#include "scalemap/cluster/messages.hpp"
#include "scalemap/core/params.hpp"
#include "scalemap/net/socket.hpp"

namespace scalemap::cluster {

inline constexpr Stage kFullPipeline[] = {Stage::Create, Stage::Map, Stage::Reduce};

// Submits one job and waits for its result. A failed job rethrows the
// master's error code (JobFailure for task or worker failures).
JobResult submit(const net::Endpoint& master, const BenchmarkParams& params,
                 std::span<const Stage> stages,
                 std::chrono::milliseconds timeout = std::chrono::milliseconds(kDefaultNetworkTimeoutMs));

}  // namespace scalemap::cluster
