#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scalemap/core/params.hpp"
#include "scalemap/core/vec3.hpp"

namespace scalemap::engine {

// Self-contained recipe for a dataset: a source followed by zero or more shifts.
// Enough to rebuild any partition on a machine with no prior state.
struct LineageSpec {
  BenchmarkParams source;
  std::vector<Vec3> shifts;

  friend bool operator==(const LineageSpec&, const LineageSpec&) = default;
};

// Little-endian binary form, used on the wire and as a memoization key.
void encode_lineage(const LineageSpec& spec, std::vector<std::byte>& out);
std::vector<std::byte> encode_lineage(const LineageSpec& spec);

// Reads from the front of `bytes`, returns the number of bytes consumed.
// Throws Error(ProtocolError) on truncated or malformed input.
std::size_t decode_lineage(std::span<const std::byte> bytes, LineageSpec& out);

void encode_params(const BenchmarkParams& p, std::vector<std::byte>& out);
std::size_t decode_params(std::span<const std::byte> bytes, BenchmarkParams& out);

}  // namespace scalemap::engine
