#pragma once

#include <functional>
#include <thread>

namespace scalemap::cli {

// Blocks SIGINT/SIGTERM for every thread created afterwards and runs
// `on_signal` on a dedicated thread when one arrives. Construct before
// spawning worker threads.
class ShutdownSignal {
 public:
  explicit ShutdownSignal(std::function<void()> on_signal);
  ~ShutdownSignal();

  ShutdownSignal(const ShutdownSignal&) = delete;
  ShutdownSignal& operator=(const ShutdownSignal&) = delete;

 private:
  std::jthread waiter_;
};

}  // namespace scalemap::cli
