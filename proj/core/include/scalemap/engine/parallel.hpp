#pragma once

#include <cstdint>
#include <functional>

namespace scalemap::engine {

// Runs fn(i) for i in [0, n) on up to `slots` threads, each pulling the next
// index when done. Rethrows the first exception after all threads join.
void parallel_for(std::uint32_t slots, std::uint64_t n,
                  const std::function<void(std::uint64_t)>& fn);

}  // namespace scalemap::engine
