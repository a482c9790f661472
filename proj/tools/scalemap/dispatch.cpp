#include "scalemap/dispatch.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <unistd.h>

#include "scalemap/analysis/scaling.hpp"
#include "scalemap/bench/pipeline.hpp"
#include "scalemap/bench/record.hpp"
#include "scalemap/cluster/master.hpp"
#include "scalemap/cluster/worker.hpp"
#include "scalemap/error.hpp"
#include "scalemap/netprobe/probe.hpp"
#include "scalemap/signals.hpp"

namespace scalemap::cli {

namespace {

struct GlobalFlags {
  std::string config_file;
  std::string scratch;
  std::string memory_budget;
  std::string log_level;
  std::uint64_t vectors_per_unit = 0;
  std::uint64_t seed = 0;
  std::uint64_t timeout_ms = 0;
  std::string master;
};

struct BenchFlags {
  bool generate = false;
  std::string load_dir;
  std::uint64_t blocks = 1;
  std::uint64_t block_size = 1;
  std::uint64_t nodes = 1;
  std::uint64_t cores = 1;
  std::uint64_t nparts = 1;
  std::string delta;
  bool skip_reduce = false;
  std::uint32_t record_bytes = 24;
  std::string storage = "memory";
  std::string mode;
  std::uint32_t slots = 0;
  std::string json;
  bool append = false;
  std::uint64_t reps = 1;
};

struct SweepFlags {
  std::string scaling;
  std::vector<std::uint64_t> counts;
  std::string axis = "nodes";
  std::uint64_t reps = 3;
};

struct MasterFlags {
  std::string bind = "0.0.0.0";
  std::uint16_t port = 7077;
  std::uint32_t workers = 1;
  std::uint64_t heartbeat_ms = 0;
};

struct WorkerFlags {
  std::uint32_t slots = 1;
  std::string name;
  std::string storage = "memory";
  std::uint32_t retries = 1;
};

struct ProbeFlags {
  std::string bind = "0.0.0.0";
  std::uint16_t port = 0;
  std::uint64_t reject_every = 0;
  std::uint64_t delay_ms = 0;
  std::string server;
  std::uint64_t k = 1;
  std::uint64_t concurrency = netprobe::kDefaultConcurrency;
  std::uint64_t payload = 0;
  double duration_s = 1.0;
  std::string json;
};

struct AnalyzeFlags {
  std::vector<std::string> inputs;
  std::string mode;
  std::string stage = "total";
  std::string units = "cores";
  std::string csv = "-";
  bool log = false;
  std::uint64_t base_units = 0;
};

struct GenerateFlags {
  std::uint64_t blocks = 1;
  std::uint64_t block_size = 1;
  std::uint32_t record_bytes = 24;
  std::string out;
};

void configure_logging(const std::string& level) {
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") {
    fail(ErrorCode::ConfigError, "unknown log level '" + level + "'");
  }
  auto logger = spdlog::get("scalemap");
  if (!logger) logger = spdlog::stderr_color_mt("scalemap");
  spdlog::set_default_logger(logger);
  spdlog::set_level(lvl);
}

Vec3 parse_delta(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      parts.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::UsageError, "bad --delta component '" + item + "'");
    }
  }
  if (parts.size() == 1) return {parts[0], parts[0], parts[0]};
  if (parts.size() == 3) return {parts[0], parts[1], parts[2]};
  fail(ErrorCode::UsageError, "--delta takes one value or dx,dy,dz");
}

BenchmarkParams make_params(const BenchFlags& b, const GlobalConfig& g) {
  if (b.generate && !b.load_dir.empty()) fail(ErrorCode::UsageError, "--generate and --load are exclusive");
  BenchmarkParams p;
  p.blocks = b.blocks;
  p.block_size_units = b.block_size;
  p.vectors_per_unit = g.vectors_per_unit;
  p.nodes = b.nodes;
  p.cores = b.cores;
  p.nparts = b.nparts;
  p.seed = g.seed;
  p.record_bytes = b.record_bytes;
  if (!b.load_dir.empty()) {
    p.source = SourceKind::LoadBinary;
    p.load_dir = b.load_dir;
  }
  if (!b.delta.empty()) p.shift_delta = parse_delta(b.delta);
  p.validate();
  return p;
}

bench::PipelineOptions make_options(const BenchFlags& b, const GlobalConfig& g, bool master_flag) {
  bench::PipelineOptions o;
  if (!b.mode.empty()) {
    o.mode = bench::parse_run_mode(b.mode);
  } else {
    o.mode = master_flag ? bench::RunMode::Cluster : bench::RunMode::Local;
  }
  o.storage = engine::parse_storage_level(b.storage);
  o.memory_budget_bytes = g.memory_budget_bytes;
  o.scratch_dir = g.scratch_dir;
  o.slots = b.slots;
  o.skip_reduce = b.skip_reduce;
  o.master = net::Endpoint::parse(g.master);
  o.network_timeout = std::chrono::milliseconds(g.network_timeout_ms);
  return o;
}

void add_bench_options(CLI::App* cmd, BenchFlags& b) {
  cmd->add_flag("--generate", b.generate, "Synthesize vectors in place (default source)");
  cmd->add_option("--load", b.load_dir, "Read block files from DIR instead of generating");
  cmd->add_option("--blocks", b.blocks, "Number of blocks")->check(CLI::PositiveNumber);
  cmd->add_option("--block_size,--block-size", b.block_size, "Block size in units")->check(CLI::PositiveNumber);
  cmd->add_option("--nodes", b.nodes, "Nodes")->check(CLI::PositiveNumber);
  cmd->add_option("--cores", b.cores, "Cores per node")->check(CLI::PositiveNumber);
  cmd->add_option("--nparts", b.nparts, "Partitions per core")->check(CLI::PositiveNumber);
  cmd->add_option("--delta", b.delta, "Shift vector: d or dx,dy,dz");
  cmd->add_flag("--skip-reduce", b.skip_reduce, "Stop after the map stage");
  cmd->add_option("--record-bytes", b.record_bytes, "On-disk record width for --load")
      ->check(CLI::IsMember({12, 24}));
  cmd->add_option("--storage", b.storage, "none|memory|disk|memory_and_disk");
  cmd->add_option("--mode", b.mode, "local|cluster (default: cluster when --master is given)");
  cmd->add_option("--slots", b.slots, "Local execution slots (default nodes*cores)");
  cmd->add_option("--json", b.json, "Write run records (JSON lines) to FILE");
  cmd->add_flag("--append", b.append, "Append to --json instead of truncating");
}

void emit_record(const bench::RunRecord& r, const std::string& json_path) {
  std::cout << bench::to_json(r) << '\n' << std::flush;
  if (!json_path.empty()) bench::write_run_records(json_path, {r}, true);
}

void truncate_unless_append(const std::string& path, bool append) {
  if (path.empty() || append) return;
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::IOError, "cannot write '" + path + "'");
}

int cmd_bench(const BenchFlags& b, const GlobalConfig& g, bool master_flag) {
  const auto params = make_params(b, g);
  const auto options = make_options(b, g, master_flag);
  truncate_unless_append(b.json, b.append);
  for (std::uint64_t rep = 0; rep < b.reps; ++rep) {
    auto record = bench::run_pipeline(params, options, rep);
    spdlog::info("rep {} create {:.6f}s map {:.6f}s reduce {:.6f}s total {:.6f}s", rep,
                 record.timings.create_s, record.timings.map_s, record.timings.reduce_s,
                 record.timings.total_s);
    emit_record(record, b.json);
  }
  return kExitOk;
}

int cmd_sweep(const BenchFlags& b, const SweepFlags& s, const GlobalConfig& g, bool master_flag) {
  const auto params = make_params(b, g);
  const auto options = make_options(b, g, master_flag);
  bench::SweepSpec spec;
  spec.counts = s.counts;
  spec.scaling = bench::parse_scaling(s.scaling);
  if (s.axis == "nodes") {
    spec.axis = bench::SweepAxis::Nodes;
  } else if (s.axis == "cores") {
    spec.axis = bench::SweepAxis::Cores;
  } else {
    fail(ErrorCode::UsageError, "--axis must be nodes or cores");
  }
  spec.reps = s.reps;
  truncate_unless_append(b.json, b.append);
  bench::run_sweep(params, spec, options, [&](const bench::RunRecord& r) { emit_record(r, b.json); });
  return kExitOk;
}

// Blocks the calling thread until SIGINT/SIGTERM.
class SignalLatch {
 public:
  SignalLatch()
      : signal_([this] {
          std::lock_guard lock(mu_);
          fired_ = true;
          cv_.notify_all();
        }) {}

  void wait() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return fired_; });
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool fired_ = false;
  ShutdownSignal signal_;
};

int cmd_master(const MasterFlags& m, const GlobalConfig& g) {
  SignalLatch latch;
  cluster::ClusterConfig cfg;
  cfg.bind_host = m.bind;
  cfg.master.port = m.port;
  cfg.expected_workers = m.workers;
  cfg.heartbeat_interval_ms = m.heartbeat_ms;
  cfg.network_timeout_ms = g.network_timeout_ms;
  cluster::Master master(cfg);
  master.start();
  std::cout << "master listening on " << m.bind << ':' << master.port() << std::endl;
  latch.wait();
  spdlog::info("shutting down master");
  master.stop();
  return kExitOk;
}

int cmd_worker(const WorkerFlags& w, const GlobalConfig& g) {
  cluster::ClusterConfig cfg;
  cfg.master = net::Endpoint::parse(g.master);
  cfg.slots = w.slots;
  cfg.registration_retries = w.retries;
  cfg.network_timeout_ms = g.network_timeout_ms;
  cfg.engine.memory_budget_bytes = g.memory_budget_bytes;
  cfg.engine.scratch_dir = g.scratch_dir;
  cfg.storage = engine::parse_storage_level(w.storage);
  std::string name = w.name;
  if (name.empty()) name = "worker-" + std::to_string(::getpid());
  cluster::Worker worker(cfg, name);
  ShutdownSignal signal([&worker] { worker.stop(); });
  worker.run();
  const auto st = worker.stats();
  spdlog::info("worker {} exiting after {} tasks", worker.worker_id(), st.tasks_executed);
  return kExitOk;
}

void emit_probe(const netprobe::ProbeReport& report, const std::string& path) {
  const auto json = netprobe::to_json(report);
  std::cout << json << '\n' << std::flush;
  if (!path.empty()) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IOError, "cannot write '" + path + "'");
    out << json << '\n';
  }
}

int cmd_probe_serve(const ProbeFlags& p) {
  netprobe::FaultPolicy policy;
  policy.reject_every = p.reject_every;
  policy.delay = std::chrono::milliseconds(p.delay_ms);
  netprobe::ProbeServer server(p.bind, p.port, policy);
  ShutdownSignal signal([&server] { server.stop(); });
  server.start();
  std::cout << "netprobe listening on " << p.bind << ':' << server.port() << std::endl;
  server.wait();
  const auto st = server.stats();
  spdlog::info("netprobe accepted {} rejected {} echoed {} sunk {} bytes", st.accepted, st.rejected,
               st.pings_echoed, st.bytes_sunk);
  return kExitOk;
}

int cmd_analyze(const AnalyzeFlags& a) {
  std::vector<bench::RunRecord> records;
  for (const auto& in : a.inputs) {
    auto more = bench::read_run_records(in);
    records.insert(records.end(), more.begin(), more.end());
  }
  std::optional<std::uint64_t> base;
  if (a.base_units != 0) base = a.base_units;
  const auto series = analysis::build_series(records, bench::parse_scaling(a.mode),
                                             analysis::parse_stage(a.stage), analysis::parse_units(a.units), base);
  const auto csv = analysis::emit_plot_data(series, a.log ? analysis::PlotScale::Log : analysis::PlotScale::Linear);
  if (a.csv == "-") {
    std::cout << csv << std::flush;
  } else {
    std::ofstream out(a.csv, std::ios::trunc);
    if (!out) fail(ErrorCode::IOError, "cannot write '" + a.csv + "'");
    out << csv;
  }
  return kExitOk;
}

int cmd_generate(const GenerateFlags& f, const GlobalConfig& g) {
  BenchmarkParams p;
  p.blocks = f.blocks;
  p.block_size_units = f.block_size;
  p.vectors_per_unit = g.vectors_per_unit;
  p.seed = g.seed;
  p.validate();
  const auto n = bench::write_block_files(p, f.out, f.record_bytes);
  std::cout << "wrote " << n << " block files to " << f.out << std::endl;
  return kExitOk;
}

int report(const Error& e) {
  std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << std::endl;
  return e.code() == ErrorCode::UsageError ? kExitUsage : kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv, const EnvLookup& getenv) {
  CLI::App app{"scalemap: vector-shift dataflow benchmark"};
  app.set_version_flag("--version", "scalemap 0.1.0");
  app.require_subcommand(1);

  GlobalFlags gf;
  auto* opt_config = app.add_option("--config", gf.config_file, "JSON config file (env SCALEMAP_CONFIG)");
  auto* opt_scratch = app.add_option("--scratch", gf.scratch, "Scratch directory for spill files");
  auto* opt_budget = app.add_option("--memory-budget", gf.memory_budget, "Cache budget, e.g. 512M or 2G");
  auto* opt_log = app.add_option("--log-level", gf.log_level, "trace|debug|info|warn|error|off");
  auto* opt_vpu = app.add_option("--vectors-per-unit", gf.vectors_per_unit, "Vectors per block-size unit")
                      ->check(CLI::PositiveNumber);
  auto* opt_seed = app.add_option("--seed", gf.seed, "Generator seed");
  auto* opt_timeout = app.add_option("--timeout-ms", gf.timeout_ms, "Network timeout in milliseconds")
                          ->check(CLI::PositiveNumber);
  auto* opt_master = app.add_option("--master", gf.master, "Master endpoint HOST:PORT");

  BenchFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("bench", "Run the create/map/reduce pipeline");
  bench_cmd->fallthrough();
  add_bench_options(bench_cmd, bench_flags);
  bench_cmd->add_option("--reps", bench_flags.reps, "Repetitions")->check(CLI::PositiveNumber);

  BenchFlags sweep_bench;
  SweepFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a strong or weak scaling sweep");
  sweep_cmd->fallthrough();
  add_bench_options(sweep_cmd, sweep_bench);
  sweep_cmd->add_option("--scaling", sweep_flags.scaling, "strong|weak")->required();
  sweep_cmd->add_option("--counts", sweep_flags.counts, "Ascending unit counts, e.g. 1,2,4,8")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--axis", sweep_flags.axis, "nodes|cores");
  sweep_cmd->add_option("--reps", sweep_flags.reps, "Repetitions per point");

  MasterFlags master_flags;
  auto* master_cmd = app.add_subcommand("master", "Run the cluster master");
  master_cmd->fallthrough();
  master_cmd->add_option("--bind", master_flags.bind, "Bind address");
  master_cmd->add_option("--port", master_flags.port, "Listen port (0 = ephemeral)");
  master_cmd->add_option("--workers", master_flags.workers, "Workers required before jobs run")
      ->check(CLI::PositiveNumber);
  master_cmd->add_option("--heartbeat-ms", master_flags.heartbeat_ms, "Worker heartbeat interval (0 = off)");

  WorkerFlags worker_flags;
  auto* worker_cmd = app.add_subcommand("worker", "Run a cluster worker");
  worker_cmd->fallthrough();
  worker_cmd->add_option("--slots", worker_flags.slots, "Concurrent task slots")->check(CLI::PositiveNumber);
  worker_cmd->add_option("--name", worker_flags.name, "Worker name");
  worker_cmd->add_option("--storage", worker_flags.storage, "Storage level for cached partitions");
  worker_cmd->add_option("--retries", worker_flags.retries, "Registration retries");

  ProbeFlags probe_flags;
  auto* probe_cmd = app.add_subcommand("netprobe", "Network capacity probe");
  probe_cmd->fallthrough();
  probe_cmd->require_subcommand(1);
  auto* serve_cmd = probe_cmd->add_subcommand("serve", "Echo/sink server");
  serve_cmd->fallthrough();
  serve_cmd->add_option("--bind", probe_flags.bind, "Bind address");
  serve_cmd->add_option("--port", probe_flags.port, "Listen port (0 = ephemeral)");
  serve_cmd->add_option("--reject-every", probe_flags.reject_every, "Close every Nth connection");
  serve_cmd->add_option("--delay-ms", probe_flags.delay_ms, "Delay before each echo");
  auto* conn_cmd = probe_cmd->add_subcommand("connections", "Open K connections and time one echo each");
  conn_cmd->fallthrough();
  conn_cmd->add_option("--server", probe_flags.server, "HOST:PORT")->required();
  conn_cmd->add_option("-k,--count", probe_flags.k, "Connections")->check(CLI::PositiveNumber);
  conn_cmd->add_option("--concurrency", probe_flags.concurrency, "Connections in flight")
      ->check(CLI::PositiveNumber);
  conn_cmd->add_option("--json", probe_flags.json, "Write the report to FILE");
  auto* tput_cmd = probe_cmd->add_subcommand("throughput", "Stream payloads and report bytes/s");
  tput_cmd->fallthrough();
  tput_cmd->add_option("--server", probe_flags.server, "HOST:PORT")->required();
  tput_cmd->add_option("--payload", probe_flags.payload, "Payload bytes per frame")->required();
  tput_cmd->add_option("--duration", probe_flags.duration_s, "Seconds to stream");
  tput_cmd->add_option("--json", probe_flags.json, "Write the report to FILE");
  auto* stop_cmd = probe_cmd->add_subcommand("shutdown", "Stop a probe server");
  stop_cmd->add_option("--server", probe_flags.server, "HOST:PORT")->required();

  AnalyzeFlags analyze_flags;
  auto* analyze_cmd = app.add_subcommand("analyze", "Turn run records into scaling plot data");
  analyze_cmd->fallthrough();
  analyze_cmd->add_option("--input", analyze_flags.inputs, "JSON-lines run files")->required();
  analyze_cmd->add_option("--mode", analyze_flags.mode, "strong|weak")->required();
  analyze_cmd->add_option("--stage", analyze_flags.stage, "create|map|reduce|total");
  analyze_cmd->add_option("--units", analyze_flags.units, "nodes|cores");
  analyze_cmd->add_option("--csv", analyze_flags.csv, "Output file, - for stdout");
  analyze_cmd->add_flag("--log", analyze_flags.log, "Add log2 columns");
  analyze_cmd->add_option("--base-units", analyze_flags.base_units, "Reference configuration");

  GenerateFlags gen_flags;
  auto* gen_cmd = app.add_subcommand("generate", "Write generated blocks as binary files");
  gen_cmd->fallthrough();
  gen_cmd->add_option("--blocks", gen_flags.blocks, "Number of blocks")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--block_size,--block-size", gen_flags.block_size, "Block size in units")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--record-bytes", gen_flags.record_bytes, "12 or 24")->check(CLI::IsMember({12, 24}));
  gen_cmd->add_option("--out", gen_flags.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << to_string(ErrorCode::UsageError) << ": " << e.what() << std::endl;
    return kExitUsage;
  }

  try {
    ConfigLayer flags;
    if (*opt_scratch) flags.scratch_dir = gf.scratch;
    if (*opt_budget) flags.memory_budget_bytes = parse_byte_size(gf.memory_budget);
    if (*opt_log) flags.log_level = gf.log_level;
    if (*opt_vpu) flags.vectors_per_unit = gf.vectors_per_unit;
    if (*opt_seed) flags.seed = gf.seed;
    if (*opt_timeout) flags.network_timeout_ms = gf.timeout_ms;
    if (*opt_master) flags.master = gf.master;

    const ConfigLayer env = layer_from_env(getenv);
    ConfigLayer file;
    std::string config_path = gf.config_file;
    if (!*opt_config) {
      if (const char* v = getenv("SCALEMAP_CONFIG"); v && *v) config_path = v;
    }
    if (!config_path.empty()) file = layer_from_file(config_path);
    const GlobalConfig g = resolve_config(flags, env, file);
    configure_logging(g.log_level);

    const bool master_flag = static_cast<bool>(*opt_master);
    if (*bench_cmd) return cmd_bench(bench_flags, g, master_flag);
    if (*sweep_cmd) return cmd_sweep(sweep_bench, sweep_flags, g, master_flag);
    if (*master_cmd) return cmd_master(master_flags, g);
    if (*worker_cmd) return cmd_worker(worker_flags, g);
    if (*serve_cmd) return cmd_probe_serve(probe_flags);
    if (*conn_cmd) {
      emit_probe(netprobe::probe_connections(net::Endpoint::parse(probe_flags.server), probe_flags.k,
                                             probe_flags.concurrency,
                                             std::chrono::milliseconds(g.network_timeout_ms)),
                 probe_flags.json);
      return kExitOk;
    }
    if (*tput_cmd) {
      emit_probe(netprobe::probe_throughput(net::Endpoint::parse(probe_flags.server), probe_flags.payload,
                                            std::chrono::duration<double>(probe_flags.duration_s)),
                 probe_flags.json);
      return kExitOk;
    }
    if (*stop_cmd) {
      netprobe::request_shutdown(net::Endpoint::parse(probe_flags.server));
      return kExitOk;
    }
    if (*analyze_cmd) return cmd_analyze(analyze_flags);
    if (*gen_cmd) return cmd_generate(gen_flags, g);
    fail(ErrorCode::UsageError, "no subcommand");
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << std::endl;
    return kExitFailure;
  }
}

}  // namespace scalemap::cli
