#pragma once

#include <cstdint>

namespace alat::detail {

struct Xorshift {
  std::uint64_t state;

  explicit Xorshift(std::uint64_t seed) : state(seed ? seed : 0x9e3779b9ULL) {}

  double uniform() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  double symmetric() { return 2 * uniform() - 1; }
};

}  // namespace alat::detail
