#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace scalemap::cli {

inline constexpr std::uint64_t kDefaultMemoryBudget = std::uint64_t{2} << 30;

struct GlobalConfig {
  std::filesystem::path scratch_dir;
  std::uint64_t memory_budget_bytes = kDefaultMemoryBudget;
  std::string log_level = "info";
  std::uint64_t vectors_per_unit = 0;
  std::uint64_t seed = 0;
  std::uint64_t network_timeout_ms = 0;
  std::string master;
};

// One source of settings; unset fields fall through to the next layer.
struct ConfigLayer {
  std::optional<std::filesystem::path> scratch_dir;
  std::optional<std::uint64_t> memory_budget_bytes;
  std::optional<std::string> log_level;
  std::optional<std::uint64_t> vectors_per_unit;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> network_timeout_ms;
  std::optional<std::string> master;
};

GlobalConfig builtin_defaults();

// flag > environment > config file > built-in default, field by field.
GlobalConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& env, const ConfigLayer& file);

using EnvLookup = std::function<const char*(const char*)>;

// SCALEMAP_SCRATCH, SCALEMAP_MASTER, SCALEMAP_LOG, SCALEMAP_MEMORY_BUDGET.
ConfigLayer layer_from_env(const EnvLookup& getenv);

// JSON object with any of: scratch_dir, memory_budget (bytes or "512M"),
// log_level, vectors_per_unit, seed, network_timeout_ms, master.
// Throws Error(ConfigError) naming the path.
ConfigLayer layer_from_file(const std::filesystem::path& path);

// "1048576", "64K", "512M", "2G" (binary multiples). Throws Error(ConfigError).
std::uint64_t parse_byte_size(const std::string& text);

}  // namespace scalemap::cli
