#pragma once

#include <cstdint>

#include "scalemap/core/vec3.hpp"

namespace scalemap {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output finalizer applied to (x + gamma).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Sequential SplitMix64 stream.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  constexpr std::uint64_t next() noexcept {
    const std::uint64_t out = splitmix64(state_);
    state_ += kGoldenGamma;
    return out;
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  constexpr double next_unit() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block_id) noexcept {
  return splitmix64(seed ^ (block_id * kGoldenGamma));
}

// Deterministic in (seed, block_id, n_vectors) only; components in [0, 1).
Block generate_block(std::uint64_t seed, std::uint64_t block_id, std::uint64_t n_vectors);

// Same stream appended to an existing buffer (avoids a copy when filling partitions).
void generate_into(std::uint64_t seed, std::uint64_t block_id, std::uint64_t n_vectors,
                   std::vector<Vec3>& out);

}  // namespace scalemap
