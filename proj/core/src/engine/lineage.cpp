#include "scalemap/engine/lineage.hpp"

#include "scalemap/core/bytes.hpp"

namespace scalemap::engine {

void encode_params(const BenchmarkParams& p, std::vector<std::byte>& out) {
  ByteWriter w(out);
  w.le(p.blocks).le(p.block_size_units).le(p.vectors_per_unit);
  w.le(p.nodes).le(p.cores).le(p.nparts).le(p.seed);
  w.u8(p.source == SourceKind::Generate ? 0 : 1);
  w.le(p.record_bytes);
  w.str(p.load_dir.string());
  w.vec3(p.shift_delta);
}

std::size_t decode_params(std::span<const std::byte> bytes, BenchmarkParams& p) {
  ByteReader r(bytes);
  p.blocks = r.le<std::uint64_t>();
  p.block_size_units = r.le<std::uint64_t>();
  p.vectors_per_unit = r.le<std::uint64_t>();
  p.nodes = r.le<std::uint64_t>();
  p.cores = r.le<std::uint64_t>();
  p.nparts = r.le<std::uint64_t>();
  p.seed = r.le<std::uint64_t>();
  const auto kind = r.u8();
  if (kind > 1) fail(ErrorCode::ProtocolError, "bad source kind " + std::to_string(kind));
  p.source = kind == 0 ? SourceKind::Generate : SourceKind::LoadBinary;
  p.record_bytes = r.le<std::uint32_t>();
  p.load_dir = r.str();
  p.shift_delta = r.vec3();
  return r.position();
}

void encode_lineage(const LineageSpec& spec, std::vector<std::byte>& out) {
  encode_params(spec.source, out);
  ByteWriter w(out);
  w.le(static_cast<std::uint32_t>(spec.shifts.size()));
  for (const Vec3& d : spec.shifts) w.vec3(d);
}

std::vector<std::byte> encode_lineage(const LineageSpec& spec) {
  std::vector<std::byte> out;
  encode_lineage(spec, out);
  return out;
}

std::size_t decode_lineage(std::span<const std::byte> bytes, LineageSpec& out) {
  const std::size_t used = decode_params(bytes, out.source);
  ByteReader r(bytes.subspan(used));
  const auto n = r.le<std::uint32_t>();
  if (n > r.remaining() / 24)
    fail(ErrorCode::ProtocolError, "shift count " + std::to_string(n) + " exceeds payload");
  out.shifts.clear();
  out.shifts.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.shifts.push_back(r.vec3());
  return used + r.position();
}

}  // namespace scalemap::engine
