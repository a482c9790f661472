#pragma once

#include <cstdint>
#include <vector>

namespace scalemap {

// One benchmark record: three float64 components.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;

  Vec3& operator+=(const Vec3& o) noexcept {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  friend Vec3 operator+(Vec3 a, const Vec3& b) noexcept { return a += b; }
};

// Contiguous run of records; the unit of generation and storage.
struct Block {
  std::uint64_t id = 0;
  std::vector<Vec3> vectors;

  std::uint64_t byte_size() const noexcept { return vectors.size() * sizeof(Vec3); }
};

static_assert(sizeof(Vec3) == 24);

}  // namespace scalemap
