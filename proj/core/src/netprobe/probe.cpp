#include "scalemap/netprobe/probe.hpp"

#include <algorithm>
#include <condition_variable>
#include <json.hpp>
#include <numeric>
#include <spdlog/spdlog.h>

#include "scalemap/core/bytes.hpp"
#include "scalemap/error.hpp"
#include "scalemap/net/wire.hpp"

namespace scalemap::netprobe {

using net::Tag;
using net::WireMessage;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string to_json(const ProbeReport& r) {
  json j = {{"kind", r.kind},
            {"connections_requested", r.connections_requested},
            {"connections_established", r.connections_established},
            {"failures", r.failures},
            {"setup_total_s", r.setup_total_s},
            {"response_times_ms", r.response_times_ms},
            {"max_response_ms", r.max_response_ms},
            {"mean_response_ms", r.mean_response_ms},
            {"payload_bytes", r.payload_bytes},
            {"bytes_sent", r.bytes_sent},
            {"bytes_acked", r.bytes_acked},
            {"elapsed_s", r.elapsed_s},
            {"throughput_bytes_per_s", r.throughput_bytes_per_s}};
  return j.dump();
}

ProbeReport parse_probe_report(std::string_view text) {
  try {
    const json j = json::parse(text);
    ProbeReport r;
    r.kind = j.at("kind").get<std::string>();
    r.connections_requested = j.at("connections_requested").get<std::uint64_t>();
    r.connections_established = j.at("connections_established").get<std::uint64_t>();
    r.failures = j.at("failures").get<std::uint64_t>();
    r.setup_total_s = j.at("setup_total_s").get<double>();
    r.response_times_ms = j.at("response_times_ms").get<std::vector<double>>();
    r.max_response_ms = j.at("max_response_ms").get<double>();
    r.mean_response_ms = j.at("mean_response_ms").get<double>();
    r.payload_bytes = j.at("payload_bytes").get<std::uint64_t>();
    r.bytes_sent = j.at("bytes_sent").get<std::uint64_t>();
    r.bytes_acked = j.at("bytes_acked").get<std::uint64_t>();
    r.elapsed_s = j.at("elapsed_s").get<double>();
    r.throughput_bytes_per_s = j.at("throughput_bytes_per_s").get<double>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("invalid probe report: ") + e.what());
  }
}

ProbeServer::ProbeServer(const std::string& host, std::uint16_t port, FaultPolicy policy)
    : policy_(policy), listener_(net::Listener::bind(host, port, 4096)) {
  net::ignore_sigpipe();
}

ProbeServer::~ProbeServer() { stop(); }

void ProbeServer::start() {
  accept_thread_ = std::jthread([this] { accept_loop(); });
}

void ProbeServer::stop() {
  std::lock_guard stop_lock(stop_mu_);
  stopping_ = true;
  if (accept_thread_.joinable() && accept_thread_.get_id() != std::this_thread::get_id())
    accept_thread_.join();
  std::list<Handler> handlers;
  {
    std::lock_guard lock(mu_);
    for (auto& s : open_) s->shutdown();
    handlers.swap(handlers_);
  }
  handlers.clear();
  listener_.close();
}

void ProbeServer::wait() {
  while (!stopping_) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  stop();
}

void ProbeServer::reap_locked() {
  handlers_.remove_if([](const Handler& h) { return h.done->load(); });
  std::erase_if(open_, [](const std::shared_ptr<net::Socket>& s) { return s.use_count() == 1; });
}

void ProbeServer::accept_loop() {
  while (!stopping_) {
    auto accepted = listener_.accept_for(std::chrono::milliseconds(20));
    {
      std::lock_guard lock(mu_);
      reap_locked();
    }
    if (!accepted) continue;
    const std::uint64_t ordinal = ++ordinal_;
    if (policy_.reject_every > 0 && ordinal % policy_.reject_every == 0) {
      std::lock_guard lock(mu_);
      rejected_.push_back(ordinal);
      accepted->close();
      continue;
    }
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::lock_guard lock(mu_);
    handlers_.push_back(Handler{std::jthread([this, done, s = std::move(*accepted)]() mutable {
                                  serve(std::move(s));
                                  *done = true;
                                }),
                                done});
  }
}

void ProbeServer::serve(net::Socket socket) {
  auto shared = std::make_shared<net::Socket>(std::move(socket));
  {
    std::lock_guard lock(mu_);
    if (stopping_) return;
    open_.push_back(shared);
  }
  std::uint64_t received = 0;
  try {
    while (auto msg = net::read_message(*shared)) {
      switch (msg->tag) {
        case Tag::Ping:
          if (policy_.delay.count() > 0) std::this_thread::sleep_for(policy_.delay);
          net::write_message(*shared, *msg);
          ++pings_;
          break;
        case Tag::Data:
          received += msg->payload.size();
          bytes_ += msg->payload.size();
          break;
        case Tag::Ack: {
          WireMessage ack{Tag::Ack, {}};
          ByteWriter(ack.payload).le(received);
          net::write_message(*shared, ack);
          break;
        }
        case Tag::Shutdown:
          stopping_ = true;
          return;
        default:
          net::write_message(*shared, WireMessage{Tag::Error, {}});
          break;
      }
    }
  } catch (const Error& e) {
    spdlog::debug("probe connection ended: {}", e.what());
  }
}

ServerStats ProbeServer::stats() const {
  std::lock_guard lock(mu_);
  ServerStats s;
  s.accepted = ordinal_;
  s.rejected = rejected_.size();
  s.pings_echoed = pings_;
  s.bytes_sunk = bytes_;
  return s;
}

std::vector<std::uint64_t> ProbeServer::rejected_ordinals() const {
  std::lock_guard lock(mu_);
  auto out = rejected_;
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Connect, ping, await the echo. Returns the response time or nullopt on failure.
std::optional<double> one_connection(const net::Endpoint& server, std::uint64_t seq,
                                     std::chrono::milliseconds timeout) {
  const auto start = Clock::now();
  try {
    net::Socket s = net::Socket::connect(server, timeout);
    s.set_recv_timeout(timeout);
    s.set_send_timeout(timeout);
    WireMessage ping{Tag::Ping, {}};
    ByteWriter(ping.payload)
        .le(seq)
        .le(static_cast<std::uint64_t>(start.time_since_epoch().count()));
    net::write_message(s, ping);
    auto echo = net::read_message(s);
    if (!echo || *echo != ping) return std::nullopt;
    return ms_since(start);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

ProbeReport probe_connections(const net::Endpoint& server, std::uint64_t k,
                              std::uint64_t concurrency, std::chrono::milliseconds timeout) {
  if (concurrency == 0) fail(ErrorCode::ConfigError, "concurrency must be >= 1");
  net::ignore_sigpipe();

  ProbeReport report;
  report.kind = "connections";
  report.connections_requested = k;
  std::vector<std::optional<double>> outcomes(k);
  std::atomic<std::uint64_t> next{0};

  const auto start = Clock::now();
  {
    const auto n_threads = std::min(concurrency, std::max<std::uint64_t>(k, 1));
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::uint64_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::uint64_t i = next++; i < k; i = next++) outcomes[i] = one_connection(server, i, timeout);
      });
    }
  }
  report.setup_total_s = std::chrono::duration<double>(Clock::now() - start).count();

  for (const auto& o : outcomes) {
    if (o) {
      report.response_times_ms.push_back(*o);
    } else {
      ++report.failures;
    }
  }
  report.connections_established = report.response_times_ms.size();
  if (!report.response_times_ms.empty()) {
    report.max_response_ms =
        *std::max_element(report.response_times_ms.begin(), report.response_times_ms.end());
    report.mean_response_ms = std::accumulate(report.response_times_ms.begin(),
                                              report.response_times_ms.end(), 0.0) /
                              static_cast<double>(report.response_times_ms.size());
  }
  if (k > 0 && report.connections_established == 0)
    fail(ErrorCode::ServerUnreachable,
         "all " + std::to_string(k) + " connections to " + server.to_string() + " failed");
  return report;
}

ProbeReport probe_throughput(const net::Endpoint& server, std::uint64_t payload_bytes,
                             std::chrono::duration<double> duration) {
  if (payload_bytes == 0) fail(ErrorCode::ConfigError, "payload_bytes must be > 0");
  if (payload_bytes + 1 > net::kMaxFrameLength)
    fail(ErrorCode::ConfigError, "payload_bytes exceeds the frame limit");
  if (duration.count() <= 0) fail(ErrorCode::ConfigError, "duration must be > 0");
  net::ignore_sigpipe();

  ProbeReport report;
  report.kind = "throughput";
  report.connections_requested = 1;
  report.payload_bytes = payload_bytes;

  net::Socket s;
  try {
    s = net::Socket::connect(server, std::chrono::milliseconds(5000));
  } catch (const Error& e) {
    fail(ErrorCode::ServerUnreachable, e.what());
  }
  report.connections_established = 1;

  WireMessage data{Tag::Data, std::vector<std::byte>(payload_bytes, std::byte{0x5A})};
  const std::vector<std::byte> frame = net::encode_frame(data);
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(duration);
  while (Clock::now() < deadline) {
    s.send_all(frame);
    report.bytes_sent += payload_bytes;
  }
  net::write_message(s, WireMessage{Tag::Ack, {}});
  s.set_recv_timeout(std::chrono::milliseconds(30000));
  auto ack = net::read_message(s);
  if (!ack || ack->tag != Tag::Ack) fail(ErrorCode::ServerUnreachable, "no ACK from server");
  ByteReader r(ack->payload);
  report.bytes_acked = r.le<std::uint64_t>();
  report.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  report.setup_total_s = report.elapsed_s;
  report.throughput_bytes_per_s = static_cast<double>(report.bytes_acked) / report.elapsed_s;
  return report;
}

void request_shutdown(const net::Endpoint& server) {
  net::ignore_sigpipe();
  net::Socket s = net::Socket::connect(server, std::chrono::milliseconds(5000));
  net::write_message(s, WireMessage{Tag::Shutdown, {}});
}

}  // namespace scalemap::netprobe
