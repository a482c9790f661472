// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any fail.
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <random>
#include <string>

#include "process.hpp"
#include "scalemap/analysis/scaling.hpp"
#include "scalemap/bench/pipeline.hpp"
#include "scalemap/bench/record.hpp"
#include "scalemap/cluster/client.hpp"
#include "scalemap/cluster/master.hpp"
#include "scalemap/core/codec.hpp"
#include "scalemap/engine/context.hpp"
#include "scalemap/error.hpp"
#include "scalemap/net/wire.hpp"
#include "scalemap/netprobe/probe.hpp"
#include "strong_scaling_check.hpp"

namespace fs = std::filesystem;
using namespace scalemap;
using namespace std::chrono_literals;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

class Scratch {
 public:
  Scratch() {
    static int n = 0;
    path_ = fs::temp_directory_path() / ("scalemap-acceptance-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::create_directories(path_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// Runs the binary to completion, discarding stdout. Returns the exit status.
int run_binary(const std::vector<std::string>& args) {
  std::vector<std::string> argv{SCALEMAP_BINARY};
  argv.insert(argv.end(), args.begin(), args.end());
  testing::Subprocess p(argv);
  while (!p.read_line().empty()) {
  }
  return p.wait();
}

// 1
Outcome efficiency_arithmetic() {
  const double a = analysis::strong_efficiency(9.64, 16) * 100.0;
  const double b = analysis::strong_efficiency(14.98, 16) * 100.0;
  const bool ok = std::abs(a - 60.25) < 1e-9 && std::abs(a - 60.3) <= 0.1 && std::abs(b - 93.6) <= 0.05;
  return {ok, fmt("9.64x/16 = %.4f%%, 14.98x/16 = %.4f%%", a, b)};
}

// 2
Outcome shift_average_commutation() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ud(-100.0, 100.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Scratch dir;
    BenchmarkParams p;
    p.vectors_per_unit = 4096;
    p.blocks = 1 + rng() % 12;
    p.cores = 1 + rng() % 8;
    p.seed = rng();
    const Vec3 delta{ud(rng), ud(rng), ud(rng)};
    engine::Context ctx({1, std::uint64_t{1} << 30, dir.path()});
    auto src = ctx.source(p);
    const Vec3 base = ctx.reduce_average(src);
    const Vec3 shifted = ctx.reduce_average(ctx.map_shift(src, delta));
    const Vec3 expect = base + delta;
    for (auto [got, want] : {std::pair{shifted.x, expect.x}, {shifted.y, expect.y}, {shifted.z, expect.z}})
      worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  return {worst <= 1e-12, fmt("100 cases, worst relative error %.3g", worst)};
}

// 3
Outcome lineage_recomputation() {
  Scratch dir;
  BenchmarkParams p;
  p.vectors_per_unit = 4096;
  p.blocks = 32;
  p.cores = 16;
  p.seed = 7;
  engine::Context ctx({1, std::uint64_t{1} << 30, dir.path()});
  auto src = ctx.persist(ctx.source(p), engine::StorageLevel::MemoryOnly);
  auto mapped = ctx.persist(ctx.map_shift(src, {0.5, 0.5, 0.5}), engine::StorageLevel::MemoryOnly);
  ctx.force(mapped);
  std::uint64_t ok = 0;
  for (std::uint64_t part = 0; part < mapped.partitions(); ++part) ok += ctx.evict_and_recompute_check(mapped, part);
  return {ok == mapped.partitions() && mapped.partitions() >= 16,
          fmt("%llu/%llu partitions bit-exact after evict+recompute", (unsigned long long)ok,
              (unsigned long long)mapped.partitions())};
}

// 4
Outcome storage_level_independence() {
  BenchmarkParams p;
  p.vectors_per_unit = 4096;
  p.blocks = 32;
  p.cores = 4;
  p.nparts = 2;
  p.seed = 11;
  auto run = [&](engine::StorageLevel level, std::uint64_t budget) {
    Scratch dir;
    bench::PipelineOptions o;
    o.storage = level;
    o.memory_budget_bytes = budget;
    o.scratch_dir = dir.path();
    return bench::run_pipeline(p, o);
  };
  const auto mem = run(engine::StorageLevel::MemoryOnly, std::uint64_t{1} << 30);
  const auto disk = run(engine::StorageLevel::DiskOnly, std::uint64_t{1} << 30);
  const auto both = run(engine::StorageLevel::MemoryAndDisk, p.total_bytes() / 2);
  const bool same = *mem.result == *disk.result && *mem.result == *both.result;
  const auto pressure = both.timings.create.spilled_partitions + both.timings.map.spilled_partitions +
                        both.timings.create.recomputed_partitions + both.timings.map.recomputed_partitions;
  return {same && pressure >= 1, fmt("results %s; constrained run spilled/recomputed %llu partition(s)",
                                     same ? "bit-identical" : "DIFFER", (unsigned long long)pressure)};
}

// 5
Outcome distributed_local_equivalence() {
  BenchmarkParams p;
  p.vectors_per_unit = 4096;
  p.blocks = 48;
  p.nodes = 2;
  p.cores = 6;
  p.nparts = 1;
  p.seed = 42;

  Scratch dir;
  bench::PipelineOptions local_opt;
  local_opt.memory_budget_bytes = std::uint64_t{1} << 30;
  local_opt.scratch_dir = dir.path();
  const Vec3 local = *bench::run_pipeline(p, local_opt).result;

  auto cluster_run = [&](bool kill_one, std::uint64_t& rescheduled) -> Vec3 {
    cluster::ClusterConfig cfg;
    cfg.bind_host = "127.0.0.1";
    cfg.master = {"127.0.0.1", 0};
    cfg.expected_workers = 2;
    cfg.network_timeout_ms = 20000;
    cluster::Master master(cfg);
    master.start();
    const std::string ep = "127.0.0.1:" + std::to_string(master.port());
    testing::Subprocess w1({SCALEMAP_BINARY, "worker", "--master", ep, "--slots", "2", "--log-level", "off"});
    testing::Subprocess w2({SCALEMAP_BINARY, "worker", "--master", ep, "--slots", "2", "--log-level", "off"});
    if (!master.wait_ready(20s)) throw std::runtime_error("workers did not register");

    std::atomic<bool> killed{false};
    if (kill_one) {
      const auto victim = w1.pid();
      master.on_result([&](const cluster::WorkerInfo& info, const cluster::TaskResult&) {
        if (info.pid == victim && !killed.exchange(true)) ::kill(victim, SIGKILL);
      });
    }
    const auto job = master.run_job(p, cluster::kFullPipeline);
    rescheduled = job.rescheduled_tasks;
    master.stop();
    if (kill_one && !killed) throw std::runtime_error("victim never reported a result");
    return *job.result;
  };

  std::uint64_t r1 = 0, r2 = 0;
  const Vec3 healthy = cluster_run(false, r1);
  const Vec3 degraded = cluster_run(true, r2);
  const bool ok = healthy == local && degraded == local;
  return {ok, fmt("2 worker processes: %s; one killed mid-job: %s (%llu task(s) rescheduled)",
                  healthy == local ? "bit-identical" : "DIFFERS", degraded == local ? "bit-identical" : "DIFFERS",
                  (unsigned long long)r2)};
}

// 6
Outcome sweep_semantics() {
  Scratch dir;
  const auto strong = (dir.path() / "strong.jsonl").string();
  const auto weak = (dir.path() / "weak.jsonl").string();
  const std::vector<std::string> common{"--counts", "1,2,4", "--axis", "nodes", "--reps", "1", "--cores", "1",
                                        "--vectors-per-unit", "256", "--log-level", "off", "--scratch",
                                        dir.path().string()};
  auto strong_args = std::vector<std::string>{"sweep", "--scaling", "strong", "--blocks", "48", "--json", strong};
  strong_args.insert(strong_args.end(), common.begin(), common.end());
  auto weak_args = std::vector<std::string>{"sweep", "--scaling", "weak", "--blocks", "16", "--json", weak};
  weak_args.insert(weak_args.end(), common.begin(), common.end());
  if (run_binary(strong_args) != 0 || run_binary(weak_args) != 0) return {false, "sweep subcommand failed"};

  std::string s_totals, w_totals;
  bool ok = true;
  const auto s = bench::read_run_records(strong);
  const auto w = bench::read_run_records(weak);
  const std::uint64_t nodes[] = {1, 2, 4};
  ok = s.size() == 3 && w.size() == 3;
  for (std::size_t i = 0; ok && i < 3; ++i) {
    ok = ok && s[i].params.nodes == nodes[i] && s[i].params.blocks == 48 && s[i].scaling == bench::Scaling::Strong;
    ok = ok && w[i].params.nodes == nodes[i] && w[i].params.blocks == 16 * nodes[i] && w[i].scaling == bench::Scaling::Weak;
    s_totals += (i ? "/" : "") + std::to_string(s[i].params.blocks);
    w_totals += (i ? "/" : "") + std::to_string(w[i].params.blocks);
  }
  return {ok, "strong totals " + s_totals + ", weak totals " + w_totals + " (from JSON lines)"};
}

// 7
Outcome codec_and_protocol() {
  std::mt19937_64 rng(7);
  auto finite_double = [&] {
    for (;;)
      if (double d = std::bit_cast<double>(rng()); std::isfinite(d)) return d;
  };
  auto finite_float = [&] {
    for (;;)
      if (float f = std::bit_cast<float>(static_cast<std::uint32_t>(rng())); std::isfinite(f)) return double(f);
  };
  std::vector<Vec3> wide, narrow;
  for (int i = 0; i < 10000; ++i) {
    wide.push_back({finite_double(), finite_double(), finite_double()});
    narrow.push_back({finite_float(), finite_float(), finite_float()});
  }
  std::vector<std::byte> b24, b12;
  RecordCodec(24).encode(wide, b24);
  RecordCodec(12).encode(narrow, b12);
  std::vector<Vec3> d24, d12;
  RecordCodec(24).decode(b24, d24);
  RecordCodec(12).decode(b12, d12);
  const bool codec_ok = d24.size() == wide.size() &&
                        std::memcmp(d24.data(), wide.data(), wide.size() * sizeof(Vec3)) == 0 && d12 == narrow;

  std::uint64_t frames_ok = 0, truncated_rejected = 0;
  for (int i = 0; i < 10000; ++i) {
    net::WireMessage m;
    m.tag = static_cast<net::Tag>(1 + rng() % net::kMaxTag);
    m.payload.resize(rng() % 256);
    for (auto& b : m.payload) b = static_cast<std::byte>(rng());
    const auto frame = net::encode_frame(m);
    frames_ok += net::decode_frame(frame) == m;
    const std::size_t cut = rng() % frame.size();
    try {
      net::decode_frame(std::span(frame.data(), cut));
    } catch (const Error& e) {
      truncated_rejected += e.code() == ErrorCode::ProtocolError;
    }
  }
  const bool ok = codec_ok && frames_ok == 10000 && truncated_rejected == 10000;
  return {ok, fmt("codec 2x10000 %s; frames %llu/10000; truncated rejected %llu/10000", codec_ok ? "exact" : "MISMATCH",
                  (unsigned long long)frames_ok, (unsigned long long)truncated_rejected)};
}

// 8
Outcome netprobe_accounting() {
  netprobe::ProbeServer rejecting("127.0.0.1", 0, {10, 0ms});
  rejecting.start();
  const auto r = netprobe::probe_connections({"127.0.0.1", rejecting.port()}, 200);
  rejecting.stop();

  netprobe::ProbeServer delayed("127.0.0.1", 0, {0, 10ms});
  delayed.start();
  const auto d = netprobe::probe_connections({"127.0.0.1", delayed.port()}, 50);
  delayed.stop();
  const double min_ms = d.response_times_ms.empty()
                            ? 0.0
                            : *std::min_element(d.response_times_ms.begin(), d.response_times_ms.end());
  const bool ok = r.connections_established == 180 && r.failures == 20 && d.connections_established == 50 &&
                  min_ms >= 10.0;
  return {ok, fmt("reject-every-10 k=200: established=%llu failures=%llu; delay 10ms: min response %.3f ms",
                  (unsigned long long)r.connections_established, (unsigned long long)r.failures, min_ms)};
}

// 9
Outcome full_size_invocation() {
  Scratch dir;
  const auto runs = (dir.path() / "run.json").string();
  const auto csv = (dir.path() / "plot.csv").string();
  const int rc = run_binary({"bench", "--generate", "--blocks", "128", "--block_size", "64", "--nodes", "1", "--nparts",
                             "1", "--cores", "12", "--json", runs, "--log-level", "off", "--scratch",
                             dir.path().string()});
  if (rc != 0) return {false, fmt("bench exited %d", rc)};
  std::ifstream in(runs);
  std::string line;
  std::getline(in, line);
  const auto j = nlohmann::json::parse(line, nullptr, false);
  const auto rec = bench::parse_run_record(line);
  const int arc = run_binary({"analyze", "--input", runs, "--mode", "strong", "--units", "cores", "--csv", csv});
  const bool ok = !j.is_discarded() && rec.params.blocks == 128 && rec.params.block_size_units == 64 &&
                  rec.params.partitions() == 12 && rec.result.has_value() && arc == 0 && fs::file_size(csv) > 0;
  return {ok, fmt("bench exit 0, %llu vectors, total %.3fs; analyze exit %d",
                  (unsigned long long)rec.params.total_vectors(), rec.timings.total_s, arc)};
}

// 10
Outcome strong_scaling_or_skip(bool& skipped) {
  const unsigned threads = acceptance::hardware_threads();
  if (threads < 8) {
    skipped = true;
    return {false, fmt("host has %u hardware thread(s), needs >= 8; see acceptance_strong_scaling", threads)};
  }
  Scratch dir;
  const auto out = acceptance::strong_scaling_check(dir.path());
  return {out.passed, out.detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> check;
  };
  bool skip10 = false;
  const Criterion criteria[] = {
      {1, "efficiency arithmetic", 0.001, efficiency_arithmetic},
      {2, "shift/average commutation", 10, shift_average_commutation},
      {3, "lineage recomputation", 5, lineage_recomputation},
      {4, "storage-level independence", 30, storage_level_independence},
      {5, "distributed/local equivalence", 60, distributed_local_equivalence},
      {6, "sweep semantics", 60, sweep_semantics},
      {7, "codec and protocol round trips", 10, codec_and_protocol},
      {8, "netprobe accounting", 30, netprobe_accounting},
      {9, "full-size bench invocation", 60, full_size_invocation},
      {10, "desk-scale strong scaling", 300, [&] { return strong_scaling_or_skip(skip10); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const char* verdict = (c.id == 10 && skip10) ? "SKIP" : (out.passed && in_time) ? "PASS" : "FAIL";
    std::printf("%s %d %s: %s [%.3fs%s]\n", verdict, c.id, c.name, out.detail.c_str(), secs,
                in_time ? "" : ", over time budget");
    std::fflush(stdout);
    if (std::strcmp(verdict, "FAIL") == 0) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
