#include "scalemap/signals.hpp"

#include <csignal>
#include <pthread.h>

namespace scalemap::cli {

namespace {

sigset_t shutdown_set() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGUSR2);  // internal wake-up for destruction
  return set;
}

}  // namespace

ShutdownSignal::ShutdownSignal(std::function<void()> on_signal) {
  sigset_t set = shutdown_set();
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  waiter_ = std::jthread([set, cb = std::move(on_signal)](std::stop_token st) {
    int sig = 0;
    while (!st.stop_requested()) {
      if (sigwait(&set, &sig) != 0) continue;
      if (sig == SIGUSR2) {
        if (st.stop_requested()) return;
        continue;
      }
      cb();
      return;
    }
  });
}

ShutdownSignal::~ShutdownSignal() {
  waiter_.request_stop();
  pthread_kill(waiter_.native_handle(), SIGUSR2);
}

}  // namespace scalemap::cli
