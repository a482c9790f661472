#include "scalemap/config.hpp"

#include <cctype>
#include <fstream>
#include <json.hpp>

#include "scalemap/cluster/config.hpp"
#include "scalemap/core/params.hpp"
#include "scalemap/error.hpp"

namespace scalemap::cli {

GlobalConfig builtin_defaults() {
  GlobalConfig g;
  g.scratch_dir = std::filesystem::temp_directory_path();
  g.memory_budget_bytes = kDefaultMemoryBudget;
  g.log_level = "info";
  g.vectors_per_unit = kDeskVectorsPerUnit;
  g.seed = 0;
  g.network_timeout_ms = cluster::kDefaultNetworkTimeoutMs;
  g.master = "127.0.0.1:7077";
  return g;
}

GlobalConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& env, const ConfigLayer& file) {
  GlobalConfig g = builtin_defaults();
  auto pick = [](auto& out, const auto& f, const auto& e, const auto& c) {
    if (f) {
      out = *f;
    } else if (e) {
      out = *e;
    } else if (c) {
      out = *c;
    }
  };
  pick(g.scratch_dir, flags.scratch_dir, env.scratch_dir, file.scratch_dir);
  pick(g.memory_budget_bytes, flags.memory_budget_bytes, env.memory_budget_bytes, file.memory_budget_bytes);
  pick(g.log_level, flags.log_level, env.log_level, file.log_level);
  pick(g.vectors_per_unit, flags.vectors_per_unit, env.vectors_per_unit, file.vectors_per_unit);
  pick(g.seed, flags.seed, env.seed, file.seed);
  pick(g.network_timeout_ms, flags.network_timeout_ms, env.network_timeout_ms, file.network_timeout_ms);
  pick(g.master, flags.master, env.master, file.master);
  return g;
}

std::uint64_t parse_byte_size(const std::string& text) {
  std::size_t pos = 0;
  std::uint64_t value = 0;
  try {
    value = std::stoull(text, &pos);
  } catch (const std::exception&) {
    fail(ErrorCode::ConfigError, "bad byte size '" + text + "'");
  }
  std::string suffix = text.substr(pos);
  for (auto& c : suffix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (suffix.empty() || suffix == "B") return value;
  if (suffix == "K" || suffix == "KB" || suffix == "KIB") return value << 10;
  if (suffix == "M" || suffix == "MB" || suffix == "MIB") return value << 20;
  if (suffix == "G" || suffix == "GB" || suffix == "GIB") return value << 30;
  fail(ErrorCode::ConfigError, "bad byte size suffix in '" + text + "'");
}

ConfigLayer layer_from_env(const EnvLookup& getenv) {
  ConfigLayer layer;
  if (const char* v = getenv("SCALEMAP_SCRATCH"); v && *v) layer.scratch_dir = v;
  if (const char* v = getenv("SCALEMAP_MASTER"); v && *v) layer.master = v;
  if (const char* v = getenv("SCALEMAP_LOG"); v && *v) layer.log_level = v;
  if (const char* v = getenv("SCALEMAP_MEMORY_BUDGET"); v && *v) layer.memory_budget_bytes = parse_byte_size(v);
  return layer;
}

ConfigLayer layer_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read config file '" + path.string() + "'");
  ConfigLayer layer;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.contains("scratch_dir")) layer.scratch_dir = j["scratch_dir"].get<std::string>();
    if (j.contains("memory_budget")) {
      const auto& m = j["memory_budget"];
      layer.memory_budget_bytes = m.is_string() ? parse_byte_size(m.get<std::string>()) : m.get<std::uint64_t>();
    }
    if (j.contains("log_level")) layer.log_level = j["log_level"].get<std::string>();
    if (j.contains("vectors_per_unit")) layer.vectors_per_unit = j["vectors_per_unit"].get<std::uint64_t>();
    if (j.contains("seed")) layer.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("network_timeout_ms")) layer.network_timeout_ms = j["network_timeout_ms"].get<std::uint64_t>();
    if (j.contains("master")) layer.master = j["master"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, "config file '" + path.string() + "': " + e.what());
  }
  return layer;
}

}  // namespace scalemap::cli
