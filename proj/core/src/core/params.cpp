#include "scalemap/core/params.hpp"

#include "scalemap/error.hpp"

namespace scalemap {

std::string_view to_string(SourceKind kind) noexcept {
  return kind == SourceKind::Generate ? "generate" : "load";
}

SourceKind parse_source_kind(std::string_view text) {
  if (text == "generate") return SourceKind::Generate;
  if (text == "load") return SourceKind::LoadBinary;
  fail(ErrorCode::InvalidParams, "unknown source kind '" + std::string(text) + "'");
}

void BenchmarkParams::validate() const {
  if (blocks == 0) fail(ErrorCode::InvalidParams, "blocks must be >= 1");
  if (block_size_units == 0) fail(ErrorCode::InvalidParams, "block_size must be >= 1");
  if (vectors_per_unit == 0) fail(ErrorCode::InvalidParams, "vectors_per_unit must be >= 1");
  if (nodes == 0 || cores == 0 || nparts == 0)
    fail(ErrorCode::InvalidParams, "nodes, cores and nparts must all be >= 1 (partitions >= 1)");
  if (source == SourceKind::LoadBinary) {
    if (record_bytes != 12 && record_bytes != 24)
      fail(ErrorCode::InvalidParams, "record_bytes must be 12 or 24");
    if (load_dir.empty()) fail(ErrorCode::InvalidParams, "load source requires a directory");
  }
}

}  // namespace scalemap
