#include "scalemap/core/partition.hpp"

#include "scalemap/error.hpp"

namespace scalemap {

std::vector<std::vector<std::uint64_t>> assign_blocks_to_partitions(std::uint64_t blocks,
                                                                    std::uint64_t partitions) {
  if (partitions == 0) fail(ErrorCode::InvalidParams, "partitions must be >= 1");
  std::vector<std::vector<std::uint64_t>> out(partitions);
  for (std::uint64_t p = 0; p < partitions; ++p) out[p].reserve(blocks / partitions + 1);
  for (std::uint64_t b = 0; b < blocks; ++b) out[b % partitions].push_back(b);
  return out;
}

std::vector<std::uint64_t> blocks_of_partition(std::uint64_t blocks, std::uint64_t partitions,
                                               std::uint64_t partition) {
  if (partitions == 0) fail(ErrorCode::InvalidParams, "partitions must be >= 1");
  std::vector<std::uint64_t> ids;
  for (std::uint64_t b = partition; b < blocks; b += partitions) ids.push_back(b);
  return ids;
}

}  // namespace scalemap
