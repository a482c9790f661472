#pragma once

#include <cstdint>
#include <vector>

namespace scalemap {

// Round-robin: block b goes to partition b % partitions.
std::vector<std::vector<std::uint64_t>> assign_blocks_to_partitions(std::uint64_t blocks,
                                                                    std::uint64_t partitions);

// Ids of the blocks owned by one partition, same rule as above.
std::vector<std::uint64_t> blocks_of_partition(std::uint64_t blocks, std::uint64_t partitions,
                                               std::uint64_t partition);

}  // namespace scalemap
