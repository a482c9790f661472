#include "scalemap/core/generate.hpp"

namespace scalemap {

void generate_into(std::uint64_t seed, std::uint64_t block_id, std::uint64_t n_vectors,
                   std::vector<Vec3>& out) {
  SplitMix64 rng(block_seed(seed, block_id));
  out.reserve(out.size() + n_vectors);
  for (std::uint64_t i = 0; i < n_vectors; ++i) {
    Vec3 v;
    v.x = rng.next_unit();
    v.y = rng.next_unit();
    v.z = rng.next_unit();
    out.push_back(v);
  }
}

Block generate_block(std::uint64_t seed, std::uint64_t block_id, std::uint64_t n_vectors) {
  Block block{block_id, {}};
  generate_into(seed, block_id, n_vectors, block.vectors);
  return block;
}

}  // namespace scalemap
